"""hbar-sequence harmonization: coherence, corrections, origin anchoring."""
import numpy as np
import pytest

from latkit import (
    LabelMap,
    LatticeSample,
    NoiseModel,
    Rect,
    Region,
    SequenceBreakError,
    SequenceConfig,
    apply_witness,
    generate,
    harmonize_maps,
    label_sequence,
    labelling_equivalent,
    model_system,
    restrict_to_points,
    Witness,
)


def sqrt_hbars(n=6, top=0.2):
    vals = sorted({round(top / np.sqrt(j), 9) for j in range(1, n + 1)}, reverse=True)
    return vals


def rescaled_frame(m: LabelMap) -> np.ndarray:
    u, v = m.basis_vectors()
    return np.column_stack([u, v]) / m.hbar


def test_identity_chart_needs_no_correction():
    chart = model_system("shear", {"strength": 0.0})
    region = Region(Rect(0, 0, 1, 1), 0.1)
    lattice, _ = generate(chart, region, [0.2, 0.1, 0.05, 0.025])
    lab = label_sequence(lattice)
    assert all(w.m == ((1, 0), (0, 1)) for w in lab.corrections)
    assert lab.warnings == ()
    frames = [rescaled_frame(m) for m in lab.maps]
    for f in frames[1:]:
        assert np.allclose(f, frames[0], atol=1e-12)


def test_sqrt_family_is_coherent_after_correction():
    # at hbar = 0.2/sqrt(j) the rounded lattice coordinates can break the
    # square lattice's nearest-neighbour ties differently per slice; the
    # inductive correction must absorb those basis rotations so that
    # consecutive corrected slices are related by the identity witness
    chart = model_system("shear", {"strength": 0.0})
    region = Region(Rect(0, 0, 1, 1), 0.1)
    lattice, _ = generate(chart, region, sqrt_hbars())
    lab = label_sequence(lattice)
    frames = [rescaled_frame(m) for m in lab.maps]
    for f in frames[1:]:
        assert np.abs(f - frames[0]).max() < 1e-8


def test_harmonic_pair_basis_converges_to_unit_frame():
    chart = model_system("harmonic_pair")
    region = Region(Rect(0, 0, 1.1, 1.1), 0.05)
    lattice, truth = generate(chart, region, sqrt_hbars())
    lab = label_sequence(lattice)
    # hidden basis of the family, read off slice 0 via the truth witness:
    # with k_true = M k_label + t, the rescaled frame equals DG0 @ M
    gt0 = restrict_to_points(truth.label_map(lattice, 0), lab.maps[0].points)
    w0 = labelling_equivalent(lab.maps[0], gt0).witness
    m_inv = np.linalg.inv(w0.m_array.astype(float))
    for m in lab.maps:
        # closed form: the chart derivative is the identity at every hbar
        frame_aligned = rescaled_frame(m) @ m_inv
        err = np.abs(frame_aligned - np.eye(2)).max()
        assert err <= m.hbar + 1e-12


def test_shuffled_conventions_are_corrected():
    # randomly relabel each slice's candidate map; harmonization must bring
    # consecutive corrected frames back into exact agreement
    chart = model_system("shear", {"strength": 0.0})
    region = Region(Rect(0, 0, 1, 1), 0.1)
    lattice, _ = generate(chart, region, sqrt_hbars())
    lab = label_sequence(lattice)
    generators = [
        np.array([[1, 0], [0, 1]]),
        np.array([[-1, 0], [0, -1]]),
        np.array([[0, -1], [1, 0]]),
        np.array([[1, 1], [0, 1]]),
        np.array([[1, 0], [1, 1]]),
        np.array([[1, -1], [0, 1]]),
    ]
    rng = np.random.default_rng(99)
    shuffled = []
    for m in lab.maps:
        s = generators[rng.integers(len(generators))]
        t = rng.integers(-3, 4, 2)
        shuffled.append(apply_witness(m, Witness.from_arrays(s, t)))
    corrected = harmonize_maps(shuffled)
    frames = [rescaled_frame(m) for m in corrected.maps]
    for f in frames[1:]:
        assert np.allclose(f, frames[0], atol=1e-12)
    # and every corrected map is still equivalent to the unshuffled one
    for a, b in zip(lab.maps, corrected.maps):
        assert labelling_equivalent(a, b).equivalent


def test_density_ratio_violation_warns_but_proceeds():
    chart = model_system("shear", {"strength": 0.0})
    region = Region(Rect(0, 0, 1, 1), 0.1)
    lattice, _ = generate(chart, region, [0.2, 0.04])
    lab = label_sequence(lattice, scfg=SequenceConfig(density_ratio=0.5))
    assert len(lab.maps) == 2
    assert any("density_ratio" in w for w in lab.warnings)


def test_single_slice_warns_and_returns_one_map():
    chart = model_system("shear", {"strength": 0.0})
    region = Region(Rect(0, 0, 1, 1), 0.1)
    lattice, _ = generate(chart, region, [0.2])
    lab = label_sequence(lattice)
    assert len(lab.maps) == 1
    assert any("single-slice" in w for w in lab.warnings)


def test_incompatible_frames_raise_sequence_break():
    hbar1, hbar2 = 0.2, 0.1
    ks = np.arange(0, 6)
    g1, g2 = np.meshgrid(ks, ks, indexing="ij")
    idx = np.column_stack([g1.ravel(), g2.ravel()]).astype(float)
    pts1 = idx * hbar1
    # second slice: a lattice 4.5x coarser than its hbar admits, far beyond
    # what any small unimodular witness can reconcile
    pts2 = idx * (4.5 * hbar2)
    m1 = LabelMap(hbar1, pts1, idx.astype(np.int64))
    m2 = LabelMap(hbar2, pts2, idx.astype(np.int64))
    with pytest.raises(SequenceBreakError) as exc:
        harmonize_maps([m1, m2])
    assert exc.value.hbar_pair == (hbar1, hbar2)


def test_origin_anchored_on_shared_points():
    # nested dyadic hbar: coarse points recur in the fine slice, so the
    # aligned labels must assign them identical actions hbar*k
    chart = model_system("shear", {"strength": 0.0})
    region = Region(Rect(0, 0, 1, 1), 0.1)
    lattice, _ = generate(chart, region, [0.2, 0.1, 0.05])
    lab = label_sequence(lattice)
    actions = [
        {tuple(p): (m.hbar * k[0], m.hbar * k[1])
         for p, k in zip(m.points, m.labels)}
        for m in lab.maps
    ]
    shared01 = set(actions[0]) & set(actions[1])
    shared12 = set(actions[1]) & set(actions[2])
    assert shared01 and shared12
    for p in shared01:
        assert actions[0][p] == pytest.approx(actions[1][p], abs=1e-12)
    for p in shared12:
        assert actions[1][p] == pytest.approx(actions[2][p], abs=1e-12)


def test_noisy_curved_chart_sequence_is_coherent():
    chart = model_system("polar_action", {"curvature": 1.0})
    region = Region(Rect(0, 0, 1.0, 1.6), 0.05)
    lattice, truth = generate(chart, region, [0.1, 0.05, 0.02],
                              NoiseModel(order=3, amplitude=1.0, seed=8))
    lab = label_sequence(lattice)
    for j, m in enumerate(lab.maps):
        gt = restrict_to_points(truth.label_map(lattice, j), m.points)
        assert labelling_equivalent(m, gt).equivalent
