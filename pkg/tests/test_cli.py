from __future__ import annotations

import json
from pathlib import Path

import pytest

from nilorbit import cli, hardy as H, orbits as O

INSTANCES = Path(__file__).resolve().parent.parent / "instances"

TORUS = {
    "group": {"dim": 2},
    "generators": [["phi"]],
    "functions": ["t^{3/2}"],
    "base_point": [0],
    "tests": [{"type": "horizontal_character", "k": [1]}],
    "declared_closure": "full",
    "N_grid": [1000, 10000],
    "seed": 0,
}


@pytest.fixture
def torus_config(tmp_path):
    p = tmp_path / "torus.json"
    p.write_text(json.dumps(TORUS))
    return str(p)


class TestGridParsing:
    def test_decade(self):
        assert cli.parse_grid("1e3:1e6:decade") == (1000, 10000, 100000, 1000000)

    def test_comma_list(self):
        assert cli.parse_grid("1e3,1e4,1e5") == (1000, 10000, 100000)

    def test_single_value(self):
        assert cli.parse_grid("1000000") == (1000000,)

    def test_explicit_list(self):
        assert cli.parse_grid([10, 100]) == (10, 100)

    def test_bad_syntax(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_grid("1e3:1e6:linear")


class TestConfigHandling:
    def test_roundtrip(self, torus_config):
        doc = cli.load_config(torus_config)
        again = json.loads(cli.dump_config(doc))
        assert again == doc

    def test_unknown_keys_rejected(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({**TORUS, "surprise": 1}))
        with pytest.raises(cli.ConfigError, match="schema"):
            cli.load_config(str(p))

    def test_shipped_instances_validate(self):
        for name in ("torus_boshernitzan", "heisenberg_pair",
                     "pointwise_dependent", "floor_pair_a", "floor_pair_b"):
            doc = cli.load_config(str(INSTANCES / f"{name}.json"))
            cfg = cli.build_orbit_config(doc)
            assert cfg.coords_dim >= 1


class TestClassifyCommand:
    def test_rows(self, capsys):
        rc = cli.main(["classify", "t^{3/2}", "t^2 + log(t)", "5 + t^{-1}"])
        out = capsys.readouterr().out.strip().splitlines()
        assert rc == 0 and len(out) == 4
        assert "equidistributed" in out[1]
        assert "unusable" in out[2]
        assert "converges-zero-signed" in out[3]

    def test_parse_error_exit(self, capsys):
        assert cli.main(["classify", "t^{3/"]) == cli.EXIT_CONFIG


class TestWindowCommand:
    def test_worked_bounds(self, tmp_path):
        out = tmp_path / "w.csv"
        rc = cli.main(["window", str(INSTANCES / "heisenberg_pair.json"),
                       "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[1].startswith("t^{3/2},3,1/2,0,5/8,0,3/5,True")
        assert lines[2].startswith("t*log(t),2,1/2,0,2/3,0,3/5,True")


class TestDrivers:
    def test_weyl_passthrough_matches_library(self, torus_config, tmp_path):
        out = tmp_path / "weyl.csv"
        rc = cli.main(["weyl", torus_config, "--N", "2000", "--out", str(out)])
        assert rc == 0
        doc = cli.load_config(torus_config)
        cfg = cli.build_orbit_config(doc)
        want = O.weyl_sum(cfg, [1], 2000)
        rows = {r.split(",")[1]: r.split(",")[2]
                for r in out.read_text().strip().splitlines()[1:]}
        assert float(rows["weyl_re_k1"]) == want.real
        assert float(rows["weyl_im_k1"]) == want.imag

    def test_orbit_dump_header(self, tmp_path):
        p = tmp_path / "heis.json"
        p.write_text(json.dumps({
            "group": {"dim": 3}, "generators": [["phi", "sqrt2", 0]],
            "functions": ["t^{3/2}"]}))
        out = tmp_path / "orbit.csv"
        rc = cli.main(["orbit", str(p), "--N", "64", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,coord_1,coord_2,coord_3,horiz_1,horiz_2"
        assert len(lines) == 65

    def test_average_csv_columns(self, tmp_path):
        rc = cli.main(["average", str(INSTANCES / "pointwise_dependent.json"),
                       "--grid", "1e3,1e4", "--out", str(tmp_path / "avg.csv")])
        assert rc == 0
        lines = (tmp_path / "avg.csv").read_text().strip().splitlines()
        assert lines[0] == "N,re(A_N),im(A_N),re(limit),im(limit),abs_err,cauchy_inc"
        first = lines[1].split(",")
        assert first[0] == "1000" and first[3] == "0.0" and first[6] == ""

    def test_discrepancy_rows(self, tmp_path):
        p = tmp_path / "t.json"
        p.write_text(json.dumps(TORUS))
        out = tmp_path / "d.csv"
        rc = cli.main(["discrepancy", str(p), "--N", "1000", "--grid", "16",
                       "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[1].startswith("1000,box_discrepancy_g16,")

    def test_obstruction_rows(self, tmp_path):
        out = tmp_path / "o.csv"
        rc = cli.main(["obstruction", str(INSTANCES / "heisenberg_pair.json"),
                       "--N", "1000", "--Mmax", "2", "--out", str(out)])
        assert rc == 0
        assert "min_cinfty_norm" in (out.read_text())

    def test_emit_plot(self, torus_config, tmp_path):
        out = tmp_path / "weyl.csv"
        rc = cli.main(["weyl", torus_config, "--N", "1000,2000",
                       "--out", str(out), "--emit-plot"])
        assert rc == 0
        xy = tmp_path / "weyl.weyl_abs_k1.xy"
        assert xy.exists()
        lines = xy.read_text().strip().splitlines()
        assert len(lines) == 2 and lines[0].split()[0] == "1000"


class TestDeterminism:
    def test_weyl_workers_byte_identical(self, torus_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["weyl", torus_config, "--N", "200000",
                         "--workers", "1", "--out", str(a)]) == 0
        assert cli.main(["weyl", torus_config, "--N", "200000",
                         "--workers", "4", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_schema_violation(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"nope": True}))
        assert cli.main(["weyl", str(p), "--N", "10"]) == cli.EXIT_CONFIG

    def test_precondition(self, tmp_path):
        p = tmp_path / "subfrac.json"
        p.write_text(json.dumps({
            "group": {"dim": 2}, "generators": [["phi"]], "functions": ["log(t)^2"]}))
        assert cli.main(["window", str(p)]) == cli.EXIT_PRECONDITION

    def test_precision_cap(self, torus_config):
        assert cli.main(["weyl", torus_config, "--N", "2e7"]) == cli.EXIT_PRECISION

    def test_missing_frequency(self, tmp_path):
        p = tmp_path / "no_tests.json"
        p.write_text(json.dumps({
            "group": {"dim": 2}, "generators": [["phi"]], "functions": ["t"]}))
        assert cli.main(["weyl", str(p), "--N", "10"]) == cli.EXIT_CONFIG
