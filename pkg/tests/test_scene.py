import json

import pytest

from foonc.services.scene import (
    LARGE,
    UPRIGHT,
    UPSIDE_DOWN,
    load_scene,
    random_scene,
    save_scene,
    scene_from_json,
    scene_kitchen,
    scene_to_json,
)


def test_standard_layout(scene):
    assert len(scene.cells) == 21
    assert [c.id for c in scene.cells if c.size == LARGE] == ["cell_12", "cell_13", "cell_14"]
    assert len(scene.objects) == 11
    assert scene.object("bottle").contents == ("vodka",)
    glass = scene.object("drinking_glass")
    assert glass.contents == () and glass.orientation == UPRIGHT
    assert scene.cell_holding("bottle") == "cell_9"
    assert scene.cell("cell_9").coord == (1, 1)
    assert scene.violations() == []


def test_kitchen_of_standard_scene(scene):
    kitchen = {str(n) for n in scene_kitchen(scene)}
    assert "bottle{vodka}" in kitchen
    assert "drinking_glass[empty]" in kitchen
    assert "spoon" in kitchen


def test_random_scene_is_deterministic():
    assert random_scene(7) == random_scene(7)


def test_random_scenes_never_violate_invariants():
    for seed in range(1000):
        assert random_scene(seed).violations() == []


def test_probabilities_drive_configuration():
    flipped = random_scene(3, upside_down_probability=1.0, stack_probability=0.0)
    assert flipped.object("drinking_glass").orientation == UPSIDE_DOWN
    assert flipped.stacks == {}
    stacked = random_scene(3, upside_down_probability=0.0, stack_probability=1.0)
    assert stacked.object("drinking_glass").orientation == UPRIGHT
    assert stacked.stacks


def test_resting_cell_follows_stacks():
    scene = random_scene(3, upside_down_probability=0.0, stack_probability=1.0)
    for top, base in scene.stacks.items():
        assert scene.resting_cell(top) == scene.cell_holding(base)
        assert scene.location(top) == ("stack", base)


def test_json_round_trip(tmp_path, scene):
    path = tmp_path / "scene.json"
    save_scene(scene, path)
    assert load_scene(path) == scene
    data = json.loads(path.read_text())
    assert data["version"] == 1
    assert {"id": "cell_9", "size": "small", "col": 1, "row": 1, "occupant": "bottle"} in data["cells"]


def test_invalid_scene_json_is_rejected(scene):
    data = scene_to_json(scene)
    data["cells"][0]["occupant"] = "bottle"
    with pytest.raises(ValueError):
        scene_from_json(data)
    with pytest.raises(ValueError):
        scene_from_json({**scene_to_json(scene), "version": 2})


def test_bundled_kitchen_matches_standard_scene(scene):
    from foonc.config import DATA_DIR
    from foonc.services.foon_parser import load_kitchen

    result = load_kitchen(DATA_DIR / "bloody_mary_kitchen.txt")
    assert result.ok
    assert list(result.kitchen) == list(scene_kitchen(scene))
