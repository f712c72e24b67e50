import numpy as np
import pytest

from momentgraph.errors import CheckpointError
from momentgraph.gradcheck import tiny_instance
from momentgraph.graph import VARIANTS
from momentgraph.model import MomentModel


class TestForward:
    def test_output_shapes(self):
        model, prep = tiny_instance(seed=0)
        out = model.forward(prep)
        t = prep.features.shape[0]
        for key in ("start_dist", "end_dist", "y"):
            assert out[key].data.shape == (1, t)
        assert out["a_ctx"].data.shape == (t, model.config.latent)

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_all_variants_run(self, variant):
        model, prep = tiny_instance(variant=variant, seed=1)
        total, kl, sp = model.loss(prep)
        assert np.isfinite(total.data).all()
        assert total.item() == pytest.approx(kl.item() + sp.item(), abs=1e-12)

    def test_no_graph_ignores_query(self):
        model, prep = tiny_instance(variant="no_graph", seed=2)
        base = model.predict(prep)
        prep.tokens = ["person", "throw"]  # different query, same visuals
        again = model.predict(prep)
        np.testing.assert_array_equal(base.start_dist, again.start_dist)

    def test_full_variant_uses_query(self):
        model, prep = tiny_instance(seed=3)
        base = model.predict(prep)
        prep.tokens = ["person", "throw"]
        again = model.predict(prep)
        assert not np.array_equal(base.start_dist, again.start_dist)

    def test_node_dropping_variants(self):
        _, prep_full = tiny_instance(seed=4)
        model_nh, prep_nh = tiny_instance(variant="no_human_node", seed=4)
        model_no, prep_no = tiny_instance(variant="no_object_node", seed=4)
        assert all(obs.n_humans == 0 for obs in prep_nh.observations)
        assert all(obs.n_objects == 0 for obs in prep_no.observations)
        assert any(obs.n_humans for obs in prep_full.observations)

    def test_no_node_types_routes_all_to_objects(self):
        _, prep = tiny_instance(variant="no_node_types", seed=5)
        for obs in prep.observations:
            assert obs.n_humans == 0
            assert obs.n_objects > 0

    def test_predict_deterministic(self):
        model, prep = tiny_instance(seed=6)
        one = model.predict(prep)
        two = model.predict(prep)
        np.testing.assert_array_equal(one.start_dist, two.start_dist)
        assert one.start_index == two.start_index


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        model, prep = tiny_instance(seed=7)
        path = tmp_path / "m.ckpt"
        model.save(str(path))
        fresh, _ = tiny_instance(seed=99)
        fresh.load(str(path))
        for name, p in model.params.items():
            assert fresh.params[name].data.tobytes() == p.data.tobytes()
        np.testing.assert_array_equal(
            fresh.predict(prep).start_dist, model.predict(prep).start_dist
        )

    def test_variant_mismatch_rejected(self, tmp_path):
        model, _ = tiny_instance(seed=8)
        path = tmp_path / "m.ckpt"
        model.save(str(path))
        other, _ = tiny_instance(variant="no_graph", seed=8)
        with pytest.raises(CheckpointError, match="mismatch"):
            other.load(str(path))

    def test_shape_mismatch_rejected(self, tmp_path):
        model, _ = tiny_instance(seed=9)
        path = tmp_path / "m.ckpt"
        model.params["temporal.w_start"].data = np.zeros((3, 1))
        model.save(str(path))
        fresh, _ = tiny_instance(seed=9)
        with pytest.raises(CheckpointError, match="temporal.w_start"):
            fresh.load(str(path))
