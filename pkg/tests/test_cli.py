import csv
import json
import math

import pytest

from sphere_excursion import covariance as cm
from sphere_excursion import geometry as geo
from sphere_excursion import specs
from sphere_excursion.cli import main
from sphere_excursion.errors import InvalidModelError


def write_model(tmp_path, name="model.json", **doc):
    doc.setdefault("version", 1)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def canonical(tmp_path):
    return write_model(tmp_path, kind="canonical", dimension=2)


class TestApprox:
    def test_routes_canonical_to_eec(self, canonical, capsys):
        code, out, _ = run(["approx", "--model", canonical, "--levels", "2,3,4"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["route"] == "eec"
        assert len(doc["results"]) == 3
        assert all(r["method"] == "eec" for r in doc["results"])
        assert doc["results"][0]["value"] == pytest.approx(0.26146412994911117, rel=1e-12)

    def test_arccos_linear_needs_constant(self, tmp_path, capsys):
        model = write_model(tmp_path, kind="arccos-linear", dimension=2)
        code, _, err = run(["approx", "--model", model, "--levels", "3"], capsys)
        assert code == 2 and "pickands-constant" in err
        code, out, _ = run(["approx", "--model", model, "--levels", "3", "--pickands-constant", "1"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["method"] == "pickands"
        assert res["metadata"]["c"] == pytest.approx(2 / math.pi)
        assert res["metadata"]["alpha"] == 1.0

    def test_eec_on_non_smooth_is_mismatch(self, tmp_path, capsys):
        model = write_model(tmp_path, kind="powered-exponential", dimension=1, c=1.0, alpha=1.0)
        code, _, _ = run(["approx", "--model", model, "--levels", "3", "--method", "eec"], capsys)
        assert code == 3

    def test_sfbm(self, tmp_path, capsys):
        model = write_model(tmp_path, kind="sfbm", dimension=1, beta=0.5)
        box = json.dumps({"kind": "box", "dimension": 1, "bounds": [[0.5, 1.0]]})
        code, out, _ = run(["approx", "--model", model, "--domain", box, "--levels", "3", "--pickands-constant", "1"], capsys)
        assert code == 0
        assert json.loads(out)["results"][0]["method"] == "sfbm"
        touching = json.dumps({"kind": "box", "dimension": 1, "bounds": [[0.0, 1.0]]})
        code, _, _ = run(["approx", "--model", model, "--domain", touching, "--levels", "3", "--pickands-constant", "1"], capsys)
        assert code == 3

    def test_low_level_annotated(self, canonical, capsys):
        _, out, _ = run(["approx", "--model", canonical, "--levels", "0.5"], capsys)
        assert "annotation" in json.loads(out)["results"][0]

    def test_csv(self, canonical, tmp_path, capsys):
        path = tmp_path / "out.csv"
        code, _, _ = run(["approx", "--model", canonical, "--levels", "2,3", "--format", "csv", "--out", str(path)], capsys)
        assert code == 0
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["u", "value", "method"] and len(rows) == 3

    def test_invalid_spec(self, tmp_path, capsys):
        assert run(["approx", "--model", str(tmp_path / "missing.json"), "--levels", "2"], capsys)[0] == 2
        bad = write_model(tmp_path, kind="schoenberg", dimension=2, coefficients=[0.5, -0.1])
        assert run(["approx", "--model", bad, "--levels", "2"], capsys)[0] == 2
        old = write_model(tmp_path, "old.json", kind="canonical", dimension=2, version=0)
        assert run(["approx", "--model", old, "--levels", "2"], capsys)[0] == 2


class TestSimulate:
    def test_reproducible_digest(self, canonical, tmp_path, capsys):
        argv = ["simulate", "--model", canonical, "--levels", "1.5,2", "--points", "256", "--replicates", "300", "--seed", "7"]
        docs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            assert run(argv + ["--out", str(path)], capsys)[0] == 0
            docs.append(json.loads(path.read_text()))
        a, b = docs
        assert a["provenance"]["payload_sha256"] == b["provenance"]["payload_sha256"]
        assert specs.payload_digest(a) == a["provenance"]["payload_sha256"]
        assert a["seed"] == 7 and a["config"]["replicates"] == 300
        assert {k: v for k, v in a.items() if k != "provenance"} == {k: v for k, v in b.items() if k != "provenance"}

    def test_seed_changes_digest(self, canonical, capsys):
        base = ["simulate", "--model", canonical, "--levels", "1.5", "--points", "128", "--replicates", "200"]
        _, a, _ = run(base + ["--seed", "1"], capsys)
        _, b, _ = run(base + ["--seed", "2"], capsys)
        assert json.loads(a)["provenance"]["payload_sha256"] != json.loads(b)["provenance"]["payload_sha256"]

    def test_replicate_csv(self, canonical, tmp_path, capsys):
        path = tmp_path / "reps.csv"
        argv = ["simulate", "--model", canonical, "--levels", "1", "--points", "64", "--replicates", "50", "--csv", str(path)]
        assert run(argv, capsys)[0] == 0
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["replicate", "seed", "statistic", "value", "u"]
        assert len(rows) == 51

    def test_euler(self, canonical, capsys):
        argv = ["simulate", "--model", canonical, "--levels=-10,1", "--points", "200", "--replicates", "100", "--kind", "euler"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        res = json.loads(out)["results"]
        assert res[0]["kind"] == "mean-euler-characteristic" and res[0]["estimate"] == 2.0

    def test_zero_replicates(self, canonical, capsys):
        assert run(["simulate", "--model", canonical, "--levels", "1", "--replicates", "0"], capsys)[0] == 2

    def test_indefinite_model_is_numeric_failure(self, tmp_path, capsys):
        model = write_model(tmp_path, kind="sine", dimension=2, c=2.0, alpha=1.5)
        argv = ["simulate", "--model", model, "--levels", "1", "--points", "100", "--replicates", "100"]
        code, _, err = run(argv, capsys)
        assert code == 4 and "smallest eigenvalue" in err


class TestValidate:
    def test_canonical(self, canonical, tmp_path, capsys):
        plot = tmp_path / "plot.csv"
        argv = ["validate", "--model", canonical, "--levels", "1.5,2,2.5", "--points", "1024",
                "--replicates", "2000", "--seed", "3", "--plot-csv", str(plot)]
        code, out, _ = run(argv, capsys)
        assert code == 0
        rows = json.loads(out)["results"]
        ec = [r for r in rows if r["comparison"] == "mean-euler-characteristic"]
        assert len(ec) == 3 and all(abs(r["z"]) <= 3 for r in ec)
        header = next(csv.reader(plot.open()))
        assert header == ["comparison", "u", "analytic", "empirical", "ci_lo", "ci_hi"]

    def test_non_smooth_trend_only(self, tmp_path, capsys):
        model = write_model(tmp_path, kind="powered-exponential", dimension=1, c=1.0, alpha=1.0)
        argv = ["validate", "--model", model, "--levels", "2.5", "--points", "256", "--replicates", "200",
                "--pickands-constant", "1"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        row = json.loads(out)["results"][0]
        assert row["trend_only"] and "trend-only" in row["note"]

    def test_empty_levels(self, canonical, capsys):
        assert run(["validate", "--model", canonical, "--levels", ""], capsys)[0] == 2

    def test_non_sphere_domain(self, canonical, capsys):
        argv = ["validate", "--model", canonical, "--domain", "semisphere:2", "--levels", "2"]
        assert run(argv, capsys)[0] == 3


class TestPickandsCommand:
    def test_exact(self, capsys):
        code, out, _ = run(["pickands", "--alpha", "2", "--exact", "--dimension", "2"], capsys)
        assert code == 0
        assert json.loads(out)["results"][0]["estimate"] == pytest.approx(1 / math.pi)

    def test_estimate(self, capsys):
        code, out, _ = run(["pickands", "--alpha", "2", "--replicates", "1000", "--seed", "1"], capsys)
        assert code == 0
        est = json.loads(out)["results"][0]["estimate"]
        assert abs(est / math.pi**-0.5 - 1) < 0.2

    def test_errors(self, capsys):
        assert run(["pickands", "--alpha", "2.5"], capsys)[0] == 2
        assert run(["pickands", "--alpha", "1.5", "--exact"], capsys)[0] == 3
        assert run(["pickands", "--alpha", "2", "--dimension", "2", "--replicates", "200"], capsys)[0] == 2


class TestCurvatures:
    def test_sphere(self, capsys):
        code, out, _ = run(["curvatures", "--domain", "sphere:2"], capsys)
        assert code == 0
        assert json.loads(out)["results"] == pytest.approx([2, 0, 4 * math.pi])

    def test_semisphere(self, capsys):
        _, out, _ = run(["curvatures", "--domain", "semisphere:2"], capsys)
        assert json.loads(out)["results"] == pytest.approx([1, math.pi, 2 * math.pi])

    def test_cap_unsupported(self, capsys):
        cap = json.dumps({"kind": "cap", "dimension": 2, "center": [0, 0, 1], "radius": 0.5})
        assert run(["curvatures", "--domain", cap], capsys)[0] == 3

    def test_custom_file(self, tmp_path, capsys):
        path = tmp_path / "dom.json"
        path.write_text(json.dumps({"kind": "custom", "dimension": 1, "area": 2.0, "lk": [1, 1]}))
        _, out, _ = run(["curvatures", "--domain", str(path)], capsys)
        assert json.loads(out)["results"] == [1.0, 1.0]


class TestSpecs:
    @pytest.mark.parametrize(
        "model,N",
        [
            (cm.Canonical(), 2),
            (cm.ArccosLinear(), 3),
            (cm.PoweredExponential(0.5, 0.7), 1),
            (cm.SineModel(2.0, 1.5), 2),
            (cm.SchoenbergSeries(2, (0.0, 0.5, 0.5)), 2),
            (cm.MonomialSeries((0.2, 0.8)), 4),
            (cm.StandardizedSFBM(0.25), 2),
        ],
    )
    def test_model_round_trip(self, model, N):
        doc = specs.model_to_spec(model, N)
        assert specs.parse_model(json.loads(json.dumps(doc))) == (model, N)

    @pytest.mark.parametrize(
        "domain",
        [
            geo.FullSphere(3),
            geo.Semisphere(1),
            geo.CoordinateBox(2, ((0.5, 1.5), (0.0, 6.0))),
            geo.Cap(2, (0.0, 0.0, 1.0), 0.5),
            geo.Custom(2, 1.0, (1.0, 2.0, 1.0)),
        ],
    )
    def test_domain_round_trip(self, domain):
        assert specs.parse_domain(json.loads(json.dumps(specs.domain_to_spec(domain)))) == domain

    def test_shorthand(self):
        assert specs.parse_domain("sphere", 3) == geo.FullSphere(3)
        with pytest.raises(InvalidModelError):
            specs.parse_domain("sphere")
        with pytest.raises(InvalidModelError):
            specs.parse_domain("torus:2")

    def test_unknown_kind(self):
        with pytest.raises(InvalidModelError):
            specs.parse_model({"version": 1, "kind": "matern", "dimension": 2})

    def test_envelope_json_round_trip(self):
        env = specs.make_envelope("approx", {"x": [1.0, math.inf]}, [{"v": 2.5}], seed=3)
        assert env["config"]["x"] == [1.0, None]
        assert json.loads(json.dumps(env)) == env
        assert specs.payload_digest(env) == env["provenance"]["payload_sha256"]
