import numpy as np
import pytest

from tpbm.phantom import PhantomError, build_layered_phantom, build_shell_phantom


def test_layered_dims_and_starts():
    ph = build_layered_phantom(
        [("scalp", 5.0), ("skull", 7.0), ("brain", 68.0)],
        lateral_extent=80.0, spacing=1.0,
    )
    assert ph.dims == (80, 80, 80)
    assert ph.spacing == pytest.approx(0.1)
    assert ph.layer_starts == pytest.approx((0.0, 0.5, 1.2))
    # layer occupancy along z
    ids = ph.material_id[0, 0, :]
    assert (ids[:5] == ph.material_index("scalp")).all()
    assert (ids[5:12] == ph.material_index("skull")).all()
    assert (ids[12:] == ph.material_index("brain")).all()


def test_region_masks_partition():
    ph = build_layered_phantom(
        [("scalp", 2.0), ("brain", 8.0)], lateral_extent=10.0, spacing=1.0
    )
    scalp = ph.region_mask("scalp")
    brain = ph.region_mask("brain")
    assert not (scalp & brain).any()
    assert (scalp | brain).all()


def test_cortex_mask_slab():
    ph = build_layered_phantom(
        [("scalp", 2.0), ("brain", 18.0)], lateral_extent=10.0, spacing=0.5
    )
    cortex = ph.cortex_mask(shell_mm=2.5)
    brain = ph.region_mask("brain")
    assert cortex.sum() > 0
    assert (cortex <= brain).all()
    # 2.5 mm shell at 0.5 mm spacing: 5 voxel layers starting at z index 4
    assert cortex[0, 0, 4:9].all()
    assert not cortex[0, 0, 9:].any()


def test_material_id_read_only():
    ph = build_layered_phantom([("brain", 10.0)], lateral_extent=10.0, spacing=1.0)
    with pytest.raises(ValueError):
        ph.material_id[0, 0, 0] = 0


@pytest.mark.parametrize(
    "layers,extent,spacing",
    [
        ([], 10.0, 1.0),
        ([("nosuch", 5.0)], 10.0, 1.0),
        ([("brain", 0.4)], 10.0, 1.0),  # layer thinner than one voxel
        ([("brain", 10.0)], 1.0, 4.0),  # lateral extent below one voxel
        ([("brain", 10.0)], 10.0, 0.0),
    ],
)
def test_build_rejects(layers, extent, spacing):
    with pytest.raises((PhantomError, ValueError)):
        build_layered_phantom(layers, lateral_extent=extent, spacing=spacing)


def test_shell_phantom_curvature():
    ph = build_shell_phantom(
        [("scalp", 3.0), ("brain", 17.0)], lateral_extent=40.0, spacing=1.0,
        curvature_radius=100.0,
    )
    brain = ph.region_mask("brain")
    # the curved surface dips at the lateral edges, so the brain starts deeper
    center_depth = np.argmax(brain[20, 20, :])
    edge_depth = np.argmax(brain[0, 20, :])
    assert edge_depth > center_depth
