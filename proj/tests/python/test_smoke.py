import numpy as np
import pytest

import scenelogic as sl


def test_compile_and_inspect():
    q = sl.shipped_query("tool_on_floor_corrected")
    assert q.name == "tool_on_floor"
    assert q.subject == "O"
    assert q.required_symbols == {"tool", "floor"}


def test_validation_reports_and_raises():
    bad = 'query q := exists X: (object(X, "a") and left(X, Y)).'
    kinds = [v["kind"] for v in sl.validate_program(bad)]
    assert "unbound variable" in kinds
    with pytest.raises(sl.ValidationError):
        sl.compile_query(bad)
    with pytest.raises(ValueError):
        sl.compile_query("query q := ")


def test_symh_roundtrip_is_bit_exact():
    rng = np.random.default_rng(0)
    a = rng.random((5, 7), dtype=np.float32)
    a[0, 0] = np.float32(1.0)
    b = sl.read_heatmap(sl.write_heatmap(a))
    assert b.dtype == np.float32
    assert b.tobytes() == a.tobytes()
    with pytest.raises(sl.FormatError):
        sl.read_heatmap(b"SYMX" + bytes(12))
    with pytest.raises(sl.ValidationError):
        sl.write_heatmap(np.full((2, 2), 1.5, dtype=np.float32))


def test_bundle_manifest_roundtrip(tmp_path):
    b = sl.Bundle("img")
    b.add("pipe", "object", np.zeros((4, 4), dtype=np.float32))
    b.add("leakage", "segment", np.eye(4, dtype=np.float32))
    with pytest.raises(sl.ValidationError):
        b.add("pipe", "object", np.zeros((4, 4), dtype=np.float32))
    assert len(b) == 2
    back = sl.read_bundle(sl.write_bundle(b, str(tmp_path)))
    assert back.image_id == "img"
    assert back.symbols == [("pipe", "object"), ("leakage", "segment")]
    assert np.array_equal(back["leakage"], np.eye(4))
    with pytest.raises(sl.IoError):
        sl.read_bundle(str(tmp_path / "missing.json"))


def test_infer_on_hand_built_bundle():
    tool = np.zeros((8, 8), dtype=np.float32)
    floor = np.zeros((8, 8), dtype=np.float32)
    tool[2, 2] = 0.9
    floor[3, 1:4] = 0.8
    b = sl.Bundle()
    b.add("tool", "object", tool)
    b.add("floor", "segment", floor)
    q = sl.shipped_query("tool_on_floor_corrected")
    r = sl.infer(q, b, scales=[1])
    assert r["sigma"] == 1
    assert r["prob"] > 0.5
    assert r["per_scale"] == {1: r["prob"]}
    assert (2, 2) == r["cells"][0][:2]
    assert sl.score(q, b, "product") == pytest.approx(0.72)
    exact = sl.infer(q, b, scales=[1], agg="exact")["prob"]
    assert sl.infer(q, b, scales=[1], agg="max")["prob"] <= exact + 1e-12


def test_generated_scenes_and_evaluation(tmp_path):
    b, label = sl.gen_scene("pipe-leak-positive", 3, noise=0.0)
    b2, _ = sl.gen_scene("pipe-leak-positive", 3, noise=0.0)
    assert label == "positive"
    assert np.array_equal(b["pipe"], b2["pipe"])
    q = sl.shipped_query("leaking_pipe")
    far, _ = sl.gen_scene("pipe-leak-far", 3, noise=0.0)
    assert sl.score(q, b) > sl.score(q, far)

    items = sl.gen_dataset(
        str(tmp_path), {"pipe-leak-positive": 2, "pipe-leak-far": 2}, seed=1, height=128, width=128, blob_max=24
    )
    assert [i["label"] for i in items] == ["positive", "positive", "negative", "negative"]
    rep = sl.evaluate(str(tmp_path), q, ["object-only", "spatial-multiscale"])
    assert set(rep["auc"]) == {"object-only", "spatial-multiscale"}
    assert rep["metrics_csv"].startswith("mode,auc,n_pos,n_neg\n")


def test_roc_auc():
    assert sl.roc_auc([0.9, 0.7, 0.6, 0.2], [True, False, True, False]) == 0.75
    with pytest.raises(sl.ValidationError):
        sl.roc_auc([0.1, 0.2], [True, True])
