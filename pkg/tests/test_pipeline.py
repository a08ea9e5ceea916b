import json

import numpy as np
import pytest

from qmst.panel import write_series_csv
from qmst.pipeline import RunConfig, parse_config, parse_transform, run_pipeline
from qmst.synthetic import CorrelatedPairParams, correlated_pair_panel


class TestParseConfig:
    def test_minimal(self):
        cfg = parse_config("input = panel.csv\n")
        assert cfg.input == "panel.csv"
        assert cfg.scales == (20,)

    def test_full(self):
        text = """
        # grid run
        input = returns.csv
        input_kind = returns
        transforms = gaussianize; amp-shuffle-above:1.8:true
        scales = 16, 32
        q_values = 1, 2, 4
        m = 2
        dt = 1
        n_sets = 10
        seed = 42
        drop_gaps = yes
        output_dir = out
        formats = json, dot
        workers = 2
        """
        cfg = parse_config(text)
        assert cfg.scales == (16, 32)
        assert cfg.q_values == (1.0, 2.0, 4.0)
        assert cfg.transforms == ("gaussianize", "amp-shuffle-above:1.8:true")
        assert cfg.drop_gaps is True
        assert cfg.formats == ("json", "dot")

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            parse_config("input = a.csv\nbogus = 1\n")

    def test_missing_input(self):
        with pytest.raises(ValueError, match="input"):
            parse_config("scales = 16\n")

    def test_bad_line(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_config("input = a.csv\nnot a key value pair\n")

    def test_validation_errors(self):
        with pytest.raises(ValueError, match="positive"):
            parse_config("input = a.csv\nq_values = -2\n")
        with pytest.raises(ValueError, match="m\\+2"):
            parse_config("input = a.csv\nscales = 3\n")
        with pytest.raises(ValueError, match="formats"):
            parse_config("input = a.csv\nformats = xml\n")
        with pytest.raises(ValueError, match="boolean"):
            parse_config("input = a.csv\ndrop_gaps = maybe\n")

    def test_config_hash_stable(self):
        a = parse_config("input = a.csv\nscales = 16\n")
        b = parse_config("scales=16\ninput=a.csv  # same thing\n")
        assert a.config_hash() == b.config_hash()
        c = parse_config("input = a.csv\nscales = 32\n")
        assert a.config_hash() != c.config_hash()


class TestParseTransform:
    def test_plain(self):
        spec = parse_transform("shuffle", seed=3)
        assert spec.kind == "shuffle"
        assert spec.seed == 3

    def test_threshold_and_signed(self):
        spec = parse_transform("amp-shuffle-above:1.8:true", seed=0)
        assert spec.threshold_sigma == 1.8
        assert spec.signed is True

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            parse_transform("frobnicate", seed=0)


@pytest.fixture(scope="module")
def panel_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "panel.csv"
    panel = correlated_pair_panel(3, CorrelatedPairParams(0.7, 1024, seed=6))
    write_series_csv(path, panel)
    return path


def base_config(panel_csv, outdir, **kw):
    return RunConfig(
        input=str(panel_csv),
        scales=kw.pop("scales", (16,)),
        q_values=kw.pop("q_values", (1.0, 2.0)),
        n_sets=kw.pop("n_sets", 4),
        seed=7,
        output_dir=str(outdir),
        **kw,
    )


class TestRunPipeline:
    def test_artifacts_and_manifest(self, panel_csv, tmp_path):
        out = tmp_path / "out"
        manifest_path = run_pipeline(base_config(panel_csv, out))
        doc = json.loads(manifest_path.read_text())
        assert doc["errors"] == {}
        names = set(doc["artifacts"])
        assert {"panel.csv", "thresholds.csv"} <= names
        for stem in ("rho", "dist"):
            assert f"{stem}_s16_q1.csv" in names
            assert f"{stem}_s16_q2.csv" in names
        for tag in ("tree", "ftree"):
            for ext in ("json", "dot", "graphml"):
                assert f"{tag}_s16_q2.{ext}" in names
        for name, digest in doc["artifacts"].items():
            assert (out / name).exists()
            assert len(digest) == 64
        assert doc["grid"] == [
            {"s": 16, "q": 1.0, "tau": doc["grid"][0]["tau"]},
            {"s": 16, "q": 2.0, "tau": doc["grid"][1]["tau"]},
        ]

    def test_worker_count_invariance(self, panel_csv, tmp_path):
        docs = []
        for workers in (1, 8):
            out = tmp_path / f"w{workers}"
            cfg = base_config(panel_csv, out, scales=(12, 16), workers=workers)
            doc = json.loads(run_pipeline(cfg).read_text())
            docs.append(doc["artifacts"])
        # byte-identical artifact hashes regardless of parallelism,
        # apart from the output_dir/workers keys themselves
        assert docs[0] == docs[1]

    def test_scale_failure_isolated(self, panel_csv, tmp_path):
        out = tmp_path / "out"
        # s=2000 exceeds the panel length, so that scale fails while s=16 runs
        cfg = base_config(panel_csv, out, scales=(16, 2000))
        doc = json.loads(run_pipeline(cfg).read_text())
        assert "2000" in doc["errors"]
        assert "rho_s16_q2.csv" in doc["artifacts"]
        assert not any("s2000" in n for n in doc["artifacts"])
        assert all(g["s"] == 16 for g in doc["grid"])

    def test_price_input_with_transform(self, tmp_path):
        rng = np.random.default_rng(11)
        prices = np.exp(np.cumsum(rng.standard_normal((4, 1025)) * 0.01, axis=1))
        price_path = tmp_path / "prices.csv"
        header = ",".join(f"p{i}" for i in range(4))
        rows = "\n".join(",".join(f"{v:.12g}" for v in col) for col in prices.T)
        price_path.write_text(f"{header}\n{rows}\n")
        out = tmp_path / "out"
        cfg = RunConfig(
            input=str(price_path),
            input_kind="prices",
            transforms=("gaussianize",),
            scales=(16,),
            q_values=(2.0,),
            n_sets=3,
            seed=1,
            output_dir=str(out),
            formats=("json",),
        )
        doc = json.loads(run_pipeline(cfg).read_text())
        assert doc["errors"] == {}
        assert "tree_s16_q2.json" in doc["artifacts"]
        assert not (out / "tree_s16_q2.dot").exists()

    def test_env_override(self, panel_csv, tmp_path, monkeypatch):
        target = tmp_path / "env-out"
        monkeypatch.setenv("QMST_OUTPUT_DIR", str(target))
        cfg = base_config(panel_csv, tmp_path / "ignored")
        manifest_path = run_pipeline(cfg)
        assert manifest_path.parent == target
