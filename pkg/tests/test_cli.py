import json

import pytest


def test_enumerate_count_only(run_cli):
    assert run_cli("enumerate", "--q", "3", "--count-only") == (0, "2\n", "")
    code, out, _ = run_cli("enumerate", "--q", "9", "--parity", "even", "--count-only")
    assert (code, out) == (0, "6\n")


def test_enumerate_csv(run_cli):
    code, out, _ = run_cli("enumerate", "--q", "5", "--parity", "odd", "--format", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "rank,signs,parity"
    assert len(lines) == 5
    assert all(line.endswith(",odd") for line in lines[1:])


def test_enumerate_json(run_cli):
    code, out, _ = run_cli("enumerate", "--q", "3")
    data = json.loads(out)
    assert code == 0
    assert data["command"] == "enumerate"
    assert [f["signs"] for f in data["result"]["functions"]] == ["+-0", "-+0"]


def test_even_modulus_is_rejected(run_cli):
    code, out, err = run_cli("enumerate", "--q", "4", "--count-only")
    assert code == 2 and out == ""
    error = json.loads(err.strip().splitlines()[-1])
    assert error == {"status": "error", "message": "Invalid modulus", "detail": error["detail"]}


def test_lvalue(run_cli):
    code, out, _ = run_cli("lvalue", "--q", "3", "--f", "+-0", "--k", "1", "--method", "digamma")
    data = json.loads(out)
    assert code == 0
    assert data["result"]["decimal"].startswith("0.60459978")
    assert data["result"]["parity"] == "odd"
    assert data["metadata"]["precision_bits"] == 128


def test_lvalue_leading_minus_sign_string(run_cli):
    code, out, _ = run_cli("lvalue", "--q", "3", "--f=-+0", "--k", "1")
    assert code == 0
    assert json.loads(out)["result"]["decimal"].startswith("-0.60459978")


def test_lvalue_direct_at_high_precision(run_cli):
    code, out, _ = run_cli("lvalue", "--q", "3", "--f", "+-0", "--k", "1", "--method", "direct", "--precision-bits", "1024")
    data = json.loads(out)
    assert code == 0
    assert data["result"]["decimal"].startswith("0.60459978")
    assert data["metadata"]["precision_bits"] == 1024


def test_lvalue_parity_mismatch(run_cli):
    code, _, err = run_cli("lvalue", "--q", "5", "--f", "+--+0", "--k", "1", "--method", "closed")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["message"] == "Parity mismatch"


def test_lvalue_period_mismatch(run_cli):
    code, _, _ = run_cli("lvalue", "--q", "5", "--f", "+-0", "--k", "1")
    assert code == 2


def test_dedekind_with_reciprocity(run_cli):
    code, out, _ = run_cli("dedekind", "--a", "2,3,5", "--m", "0,0,0", "--i", "0", "--check-reciprocity")
    data = json.loads(out)
    assert code == 0
    assert data["result"]["reciprocity"]["holds"] is True
    assert data["metadata"]["sign_convention"] == "global-1/correction+1"


def test_dedekind_singular_term(run_cli):
    code, _, err = run_cli("dedekind", "--a", "2,4,5", "--m", "0,0,0", "--check-reciprocity")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["message"] == "Singular Dedekind term"


def test_spoly(run_cli):
    code, out, _ = run_cli("spoly", "--u", "1", "--k", "1")
    result = json.loads(out)["result"]
    assert code == 0
    assert result["degree"] == 2
    assert result["coefficients"] == [
        {"power": 0, "num": "2", "den": "3"},
        {"power": 1, "num": "-1", "den": "1"},
        {"power": 2, "num": "1", "den": "3"},
    ]
    assert result["leading_coefficient"] == result["leading_coefficient_formula"]


def test_spoly_reports_the_calibrated_convention(run_cli):
    _, out, _ = run_cli("spoly", "--u", "2", "--k", "1")
    assert json.loads(out)["metadata"]["sign_convention"] == "global-1/correction+1"
    _, out, _ = run_cli("spoly", "--u", "1", "--k", "1", "--method", "interpolation")
    assert json.loads(out)["metadata"]["sign_convention"] is None


def test_sign_convention_absent_when_unused(run_cli):
    _, out, _ = run_cli("lvalue", "--q", "3", "--f", "+-0", "--k", "1")
    assert json.loads(out)["metadata"]["sign_convention"] is None


def test_moments_enumeration(run_cli):
    code, out, _ = run_cli("moments", "--q", "5", "--k", "1", "--order", "2", "--method", "enumeration", "--format", "json")
    result = json.loads(out)["result"]
    assert code == 0
    assert result["decimal"].startswith("0.789568")
    assert result["midpoint"].startswith("0x")
    assert result["label"] == "corrected"


def test_moments_partition_cross_checks(run_cli):
    code, out, _ = run_cli("moments", "--q", "7", "--k", "1", "--order", "4", "--method", "partition")
    result = json.loads(out)["result"]
    assert code == 0
    assert result["pi_exponent"] == 4


def test_moments_limit(run_cli):
    code, out, _ = run_cli("moments", "--limit", "--k", "1", "--order", "4", "--method", "partition")
    result = json.loads(out)["result"]
    assert code == 0
    assert result["q"] is None
    assert (result["coefficient_num"], result["coefficient_den"]) == ("11", "180")


def test_moments_paper_is_labelled(run_cli):
    code, out, _ = run_cli("moments", "--limit", "--k", "1", "--order", "2", "--method", "paper")
    data = json.loads(out)
    assert code == 0
    assert data["metadata"]["label"] == "paper-literal"
    assert (data["result"]["coefficient_num"], data["result"]["coefficient_den"]) == ("1", "12")


def test_moments_argument_errors(run_cli):
    assert run_cli("moments", "--q", "5", "--k", "1", "--order", "2", "--method", "montecarlo")[0] == 2
    assert run_cli("moments", "--limit", "--k", "1", "--order", "2", "--method", "enumeration")[0] == 2
    assert run_cli("moments", "--q", "5", "--limit", "--k", "1", "--order", "2")[0] == 2


def test_monte_carlo_runs_are_byte_identical(run_cli, monkeypatch):
    argv = ("moments", "--q", "101", "--k", "1", "--order", "2", "--method", "montecarlo", "--samples", "30000", "--seed", "11")
    first = run_cli(*argv)
    monkeypatch.setenv("ERDOS_THREADS", "4")
    second = run_cli(*argv)
    assert first[0] == 0
    assert first[1] == second[1]
    data = json.loads(first[1])
    assert data["metadata"]["seed"] == 11
    assert data["result"]["samples"] == 30000


def test_distribution_writes_both_csvs(run_cli, tmp_path):
    target = tmp_path / "cdf.csv"
    code, out, _ = run_cli("distribution", "--q", "5", "--k", "1", "--bins", "4", "--out", str(target))
    assert code == 0
    assert target.read_text().splitlines()[0] == "value,cdf"
    assert len(target.read_text().splitlines()) == 5
    hist = tmp_path / "cdf_hist.csv"
    assert hist.read_text().splitlines()[0] == "bin_lo,bin_hi,count"
    assert json.loads(out)["result"]["histogram_path"] == str(hist)


def test_density_bound(run_cli):
    code, out, _ = run_cli("density", "--max-q", "15", "--mode", "bound")
    final = json.loads(out)["result"]["final"]
    assert code == 0
    assert final["ratio"] == {"num": "73", "den": "4706"}


def test_density_csv(run_cli):
    code, out, _ = run_cli("density", "--max-q", "9", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "x,numerator,denominator,ratio"
    assert out.splitlines()[-1].startswith("9,7,98,")


def test_verify_small(run_cli):
    code, out, _ = run_cli("verify", "--max-q", "7", "--format", "json")
    records = json.loads(out)["result"]["records"]
    assert code == 0
    assert [r["q"] for r in records] == [3, 5, 7]
    assert all(r["certified_zero_count"] == 0 and r["undecided_count"] == 0 for r in records)


@pytest.mark.slow
def test_verify_through_q15(run_cli):
    code, out, _ = run_cli("verify", "--max-q", "15", "--format", "json")
    records = json.loads(out)["result"]["records"]
    assert code == 0
    assert len(records) == 7
    assert all(r["certified_zero_count"] == 0 for r in records)


def test_report_markdown(run_cli, tmp_path):
    code, out, _ = run_cli("report", "--k", "1", "--max-n", "2")
    assert code == 0
    assert "**no**" in out
    target = tmp_path / "report.md"
    assert run_cli("report", "--k", "1", "--max-n", "2", "--out", str(target)) == (0, "", "")
    assert target.read_text() == out


def test_invalid_precision_setting(run_cli, monkeypatch):
    monkeypatch.setenv("ERDOS_PRECISION_BITS", "12")
    code, _, err = run_cli("enumerate", "--q", "3", "--count-only")
    assert code == 2
    assert json.loads(err)["message"] == "Invalid configuration"


def test_precision_flag_below_floor(run_cli):
    code, _, err = run_cli("lvalue", "--q", "3", "--f", "+-0", "--k", "1", "--precision-bits", "20")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["message"] == "Invalid precision"


def test_unknown_command(run_cli):
    assert run_cli("plot")[0] == 2
