import numpy as np
import pytest

from momentgraph.autodiff import Tensor
from momentgraph.errors import InputError
from momentgraph.visual import (
    HUMAN,
    ActivityFeatures,
    CategoryMap,
    Detection,
    FrameObservations,
    NodeEmbedParams,
    categorize_detections,
    embed_nodes,
    select_keyframe,
    variance_of_laplacian,
)


def box_blur(img):
    out = img.copy()
    padded = np.pad(img, 1, mode="edge")
    for i in range(img.shape[0]):
        for j in range(img.shape[1]):
            out[i, j] = padded[i : i + 3, j : j + 3].mean()
    return out


class TestSharpness:
    def test_constant_image_is_zero(self):
        assert variance_of_laplacian(np.full((8, 8), 3.7)) == 0.0

    def test_checkerboard_beats_blur(self):
        idx = np.indices((10, 10)).sum(axis=0)
        checker = (idx % 2).astype(float)
        assert variance_of_laplacian(checker) > variance_of_laplacian(box_blur(checker))

    def test_single_bright_pixel_hand_value(self):
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        # interior response: the 3x3 pattern [0,1,0; 1,-4,1; 0,1,0]
        responses = np.array([0, 1, 0, 1, -4, 1, 0, 1, 0], dtype=float)
        assert variance_of_laplacian(img) == pytest.approx(responses.var(), abs=1e-15)

    def test_too_small_image(self):
        with pytest.raises(InputError):
            variance_of_laplacian(np.zeros((2, 5)))


class TestKeyframe:
    def test_single_frame(self):
        assert select_keyframe([np.random.default_rng(0).normal(size=(6, 6))]) == 0

    def test_sharp_among_blurred(self):
        sharp = np.random.default_rng(1).normal(size=(10, 10))
        assert select_keyframe([box_blur(sharp), sharp, box_blur(sharp)]) == 1

    def test_all_identical_picks_first(self):
        frame = np.random.default_rng(2).normal(size=(6, 6))
        assert select_keyframe([frame.copy() for _ in range(4)]) == 0

    def test_empty_list(self):
        with pytest.raises(InputError):
            select_keyframe([])


class TestRouting:
    def test_basic_split(self):
        cmap = CategoryMap({"hand": HUMAN})
        dets = [Detection("hand", 0.9, np.ones(4)), Detection("table", 0.8, np.zeros(4))]
        obs = categorize_detections(dets, cmap, top_n=15)
        assert obs.n_humans == 1 and obs.n_objects == 1
        assert obs.human_labels == ["hand"] and obs.object_labels == ["table"]

    def test_all_human_gives_zero_row_objects(self):
        cmap = CategoryMap({"person": HUMAN})
        dets = [Detection("person", 0.5, np.ones(4)) for _ in range(3)]
        obs = categorize_detections(dets, cmap, top_n=15)
        assert obs.objects.shape == (0, 4)
        assert obs.n_humans == 3

    def test_top_n_cut_before_split(self):
        cmap = CategoryMap({"person": HUMAN})
        dets = [Detection(f"obj{i}", 0.9 - 0.05 * i, np.full(2, i)) for i in range(5)]
        dets.append(Detection("person", 0.1, np.zeros(2)))
        obs = categorize_detections(dets, cmap, top_n=5)
        # the human is the least confident detection and falls to the cut
        assert obs.n_humans == 0
        assert obs.n_objects == 5

    def test_count_invariant(self):
        rng = np.random.default_rng(3)
        cmap = CategoryMap({"person": HUMAN})
        labels = ["person", "cup", "door", "bag"]
        for _ in range(20):
            dets = [
                Detection(str(rng.choice(labels)), float(rng.uniform(0, 1)), rng.normal(size=3))
                for _ in range(int(rng.integers(0, 10)))
            ]
            top_n = int(rng.integers(1, 8))
            obs = categorize_detections(dets, cmap, top_n)
            assert obs.n_humans + obs.n_objects == min(len(dets), top_n)

    def test_stable_order_on_ties(self):
        dets = [Detection("a", 0.5, np.array([1.0])), Detection("b", 0.5, np.array([2.0]))]
        obs = categorize_detections(dets, CategoryMap(), top_n=15)
        assert obs.object_labels == ["a", "b"]


class TestNodeEmbedding:
    def _params(self, seed=0, d_v=3, d_o=4, latent=5):
        return NodeEmbedParams.create(np.random.default_rng(seed), d_v, d_o, latent, {})

    def test_zero_input_zero_output(self):
        p = self._params()
        obs = FrameObservations(humans=np.zeros((2, 4)), objects=np.zeros((0, 4)))
        p.b_h.data[:] = 0.0
        a0, h0, o0 = embed_nodes(obs, Tensor(np.zeros((1, 3))), p)
        np.testing.assert_array_equal(a0.data, np.zeros((1, 5)))
        np.testing.assert_array_equal(h0.data, np.zeros((2, 5)))
        assert o0.data.shape == (0, 5)

    def test_outputs_bounded(self):
        rng = np.random.default_rng(1)
        p = self._params(seed=2)
        obs = FrameObservations(humans=rng.normal(size=(2, 4)) * 10, objects=rng.normal(size=(3, 4)) * 10)
        a0, h0, o0 = embed_nodes(obs, Tensor(rng.normal(size=(1, 3)) * 10), p)
        for t in (a0, h0, o0):
            assert (np.abs(t.data) < 1.0).all()

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(4)
        p = self._params(seed=5)
        humans = rng.normal(size=(2, 4))
        objects = rng.normal(size=(3, 4))
        a_raw = rng.normal(size=(1, 3))
        a0, h0, o0 = embed_nodes(FrameObservations(humans=humans, objects=objects), Tensor(a_raw), p)
        np.testing.assert_allclose(a0.data[0], np.tanh(a_raw[0] @ p.w_a.data + p.b_a.data[0]), atol=1e-12)
        for k in range(2):
            np.testing.assert_allclose(h0.data[k], np.tanh(humans[k] @ p.w_h.data + p.b_h.data[0]), atol=1e-12)
        for j in range(3):
            np.testing.assert_allclose(o0.data[j], np.tanh(objects[j] @ p.w_o.data + p.b_o.data[0]), atol=1e-12)


class TestValidation:
    def test_confidence_range(self):
        with pytest.raises(InputError):
            Detection("cup", 1.5, np.zeros(2))

    def test_activity_features_invariants(self):
        with pytest.raises(InputError):
            ActivityFeatures("v", np.zeros((0, 4)), 1.0, 0.0)
        with pytest.raises(InputError):
            ActivityFeatures("v", np.zeros((4, 4)), 1.0, 99.0)

    def test_category_map_rejects_unknown_category(self):
        with pytest.raises(InputError):
            CategoryMap({"cup": "vehicle"})

    def test_unknown_label_routes_to_object(self):
        assert CategoryMap().category("anything") == "object"
