'''
Scene and manifest parsing.
'''

import os

import pytest
from pydantic import ValidationError

from systole_lab.config import settings
from systole_lab.lab.manifest import (
    FlatTorusScene,
    WarpedCylinderScene,
    build_scene,
    load_manifest,
    load_scene,
)
from systole_lab.utils.errors import MissingInput, SchemaError

REPO = os.path.dirname(os.path.abspath(__file__))

TORUS = {'schema': 1, 'id': 't', 'model': 'flat_torus', 'a': [1.0, 0.0], 'b': [0.0, 2.0], 'resolution': 6}
DISC = {'schema': 1, 'id': 'd', 'model': 'flat_disc', 'resolution': 4}


def manifest(**overrides):
    data = {
        'schema': 1,
        'scenes': [TORUS, DISC],
        'experiments': [{'id': 'e1', 'scene': 't', 'operation': 'systole'}],
        'tolerances': {'default': 0.05, 'systole': 0.01},
    }
    data.update(overrides)
    return data


def test_load_scene(write_json):
    spec = load_scene(write_json('torus.json', TORUS))
    assert isinstance(spec, FlatTorusScene)
    S = build_scene(spec)
    assert S.area == pytest.approx(2.0)
    assert build_scene(spec, 8).n_vertices == 64


def test_shipped_scenes_parse():
    scenes = os.path.join(REPO, 'scenes')
    for name in sorted(os.listdir(scenes)):
        spec = load_scene(os.path.join(scenes, name))
        assert spec.schema_version == 1


def test_warped_scene():
    spec = load_scene(os.path.join(REPO, 'scenes', 'funnel_exp.json'))
    assert isinstance(spec, WarpedCylinderScene)
    S = build_scene(spec, 4)
    assert S.model_data['x_cells'] == 96
    assert S.radial.max() == pytest.approx(6.0)


def test_funnel_warp_scene():
    from systole_lab.lab.manifest import scene_adapter
    spec = scene_adapter.validate_python({
        'id': 'f', 'model': 'warped_cylinder', 'x_range': [0.0, 3.0], 'circumference': 1.0, 'resolution': 4,
        'warp': {'kind': 'funnel', 'kappa_inf': -4.0, 'start': 1.0, 'width': 1.0},
    })
    S = build_scene(spec)
    assert S.chi == 0
    assert S.curvature.min() < -3.0


def test_unknown_schema(write_json):
    with pytest.raises(ValidationError):
        load_scene(write_json('bad.json', dict(TORUS, schema=2)))


def test_unknown_model(write_json):
    with pytest.raises(ValidationError):
        load_scene(write_json('bad.json', dict(TORUS, model='mobius')))


def test_extra_key(write_json):
    with pytest.raises(ValidationError):
        load_scene(write_json('bad.json', dict(TORUS, colour='red')))


def test_missing_file(tmp_path):
    with pytest.raises(MissingInput):
        load_scene(os.path.join(tmp_path, 'nope.json'))


def test_invalid_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"schema": 1,')
    with pytest.raises(SchemaError):
        load_scene(str(path))


def test_manifest_tolerances(write_json):
    man = load_manifest(write_json('m.json', manifest()))
    exp = man.experiments[0]
    assert man.scene('t').id == 't'
    assert man.tolerance_for(exp, 0.5) == 0.01
    other = exp.model_copy(update={'operation': 'sandwich'})
    assert man.tolerance_for(other, 0.5) == 0.05
    explicit = exp.model_copy(update={'tolerance': 0.2})
    assert man.tolerance_for(explicit, 0.5) == 0.2


def test_manifest_duplicate_scene(write_json):
    with pytest.raises(SchemaError):
        load_manifest(write_json('m.json', manifest(scenes=[TORUS, TORUS])))


def test_manifest_unknown_scene(write_json):
    experiments = [{'id': 'e1', 'scene': 'nowhere', 'operation': 'systole'}]
    with pytest.raises(SchemaError):
        load_manifest(write_json('m.json', manifest(experiments=experiments)))


def test_manifest_unknown_operation(write_json):
    experiments = [{'id': 'e1', 'scene': 't', 'operation': 'fly'}]
    with pytest.raises(ValidationError):
        load_manifest(write_json('m.json', manifest(experiments=experiments)))


def test_manifest_negative_tolerance(write_json):
    with pytest.raises(ValidationError):
        load_manifest(write_json('m.json', manifest(tolerances={'default': -1.0})))


def test_manifest_scene_paths_are_relative(write_json):
    write_json('torus.json', TORUS)
    man = load_manifest(write_json('m.json', manifest(scenes=['torus.json', DISC])))
    assert [s.id for s in man.scenes] == ['t', 'd']


def test_acceptance_manifest_parses():
    path = os.path.join(REPO, 'systole_lab', 'config', 'acceptance.json')
    man = load_manifest(path)
    assert len(man.scenes) >= 10
    assert len({e.id for e in man.experiments}) == len(man.experiments)


def test_settings_sections():
    assert settings.section('solver')['tol'] == 1e-9
    assert settings.section('missing') == {}
    assert settings.app_info['software']['version']


def test_job_count(monkeypatch):
    monkeypatch.delenv(settings.JOBS_ENV, raising=False)
    assert settings.job_count(None) == 1
    assert settings.job_count(3) == 3
    monkeypatch.setenv(settings.JOBS_ENV, '5')
    assert settings.job_count(3) == 5
    monkeypatch.setenv(settings.JOBS_ENV, 'many')
    assert settings.job_count(2) == 2


def test_configure_logging_colours_level_names():
    import io
    import logging
    stream = io.StringIO()
    handler = settings.configure_logging('INFO', color=True, stream=stream)
    try:
        logging.getLogger('systole_lab.test').warning('Test: coloured')
        assert '\033[33mWARNING\033[0m' in stream.getvalue()
        assert 'Test: coloured' in stream.getvalue()
    finally:
        logging.getLogger().removeHandler(handler)
