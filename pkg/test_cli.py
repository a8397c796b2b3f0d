'''
End to end runs of the command line front-end.
'''

import csv
import json
import os

import pytest

from systole_lab import main
from systole_lab.lab.manifest import build_scene, load_scene
from systole_lab.utils.data_handler import ResultWriter, round_significant, rounded

DISC = {'schema': 1, 'id': 'disc', 'model': 'flat_disc', 'radius': 1.0, 'resolution': 4}
TORUS = {'schema': 1, 'id': 'torus', 'model': 'flat_torus', 'a': [1.0, 0.0], 'b': [0.3, 1.0], 'resolution': 8}


def read(path):
    with open(path) as f:
        return json.load(f)


def verify_manifest(out, params, tolerance=None, scene=DISC):
    experiment = {'id': 'disc_spectrum', 'scene': scene['id'], 'operation': 'spectrum', 'params': params}
    if tolerance is not None:
        experiment['tolerance'] = tolerance
    return {'schema': 1, 'output': str(out), 'scenes': [scene], 'experiments': [experiment]}


def test_spectrum(write_json, tmp_path):
    out = tmp_path / 'out'
    code = main.main(['spectrum', '--scene', write_json('disc.json', DISC), '--out', str(out), '--refinements', '2'])
    assert code == 0
    with open(out / 'spectrum.csv') as f:
        rows = list(csv.DictReader(f))
    assert [int(r['resolution']) for r in rows] == [4, 8]
    data = read(out / 'spectrum.json')
    assert data['scene'] == 'disc'
    assert data['extrapolated']['value'] < float(rows[-1]['lambda0'])


def test_spectrum_exports_finest_mesh(write_json, tmp_path):
    out = tmp_path / 'out'
    args = ['spectrum', '--scene', write_json('disc.json', DISC), '--out', str(out), '--refinements', '2', '--export-mesh']
    assert main.main(args) == 0
    fine = build_scene(load_scene(str(tmp_path / 'disc.json')), 8)
    lines = (out / 'disc.off').read_text().splitlines()
    assert lines[0] == 'OFF'
    assert lines[1] == f'{fine.n_vertices} {fine.n_triangles} {fine.n_edges}'
    assert len(lines) == 2 + fine.n_vertices + fine.n_triangles
    with open(out / 'disc_edges.csv') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == fine.n_edges
    assert min(float(r['length']) for r in rows) > 0.0


def test_spectrum_without_export_writes_no_mesh(write_json, tmp_path):
    out = tmp_path / 'out'
    assert main.main(['spectrum', '--scene', write_json('disc.json', DISC), '--out', str(out)]) == 0
    assert not os.path.exists(out / 'disc.off')


def test_spectrum_missing_scene(tmp_path):
    assert main.main(['spectrum', '--scene', str(tmp_path / 'none.json'), '--out', str(tmp_path)]) == 2


def test_spectrum_unknown_schema(write_json, tmp_path):
    path = write_json('disc.json', dict(DISC, schema=2))
    assert main.main(['spectrum', '--scene', path, '--out', str(tmp_path)]) == 2


def test_systole(write_json, tmp_path):
    out = tmp_path / 'out'
    assert main.main(['systole', '--scene', write_json('torus.json', TORUS), '--out', str(out)]) == 0
    data = read(out / 'systole.json')
    assert data['loop']['side'] == 'TwoSided'
    assert data['lattice_systole'] == pytest.approx(1.0)
    assert -1e-9 <= data['relative_gap'] < 0.05


def test_systole_exports_mesh(write_json, tmp_path):
    out = tmp_path / 'out'
    args = ['systole', '--scene', write_json('torus.json', TORUS), '--out', str(out), '--export-mesh']
    assert main.main(args) == 0
    assert (out / 'torus.off').read_text().startswith('OFF\n64 128 192\n')
    assert (out / 'torus_edges.csv').read_text().startswith('v0,v1,length\n')


def test_systole_of_a_disc_fails(write_json, tmp_path):
    assert main.main(['systole', '--scene', write_json('disc.json', DISC), '--out', str(tmp_path)]) == 1


def test_cover(tmp_path, write_json):
    out = tmp_path / 'out'
    torus = dict(TORUS, b=[0.0, 1.0])
    assert main.main(['cover', '--scene', write_json('torus.json', torus), '--out', str(out), '--ks', '2,4']) == 0
    data = read(out / 'cover.json')
    assert [(r['k'], r['cover']) for r in data['rows']] == [(2, 'chain'), (2, 'closed'), (4, 'chain'), (4, 'closed')]


def test_bad_sheet_counts(write_json, tmp_path):
    with pytest.raises(SystemExit):
        main.main(['cover', '--scene', write_json('torus.json', TORUS), '--out', str(tmp_path), '--ks', '0,2'])


def test_verify_holds(write_json, tmp_path):
    out = tmp_path / 'out'
    path = write_json('m.json', verify_manifest(out, {'lower': 1.0, 'upper': 100.0}))
    assert main.main(['verify', '--manifest', path]) == 0
    report = read(out / 'report.json')
    assert report['schema'] == 1
    assert [r['name'] for r in report['reports']] == ['spectrum_lower', 'spectrum_upper']
    assert {r['verdict'] for r in report['reports']} == {'Holds'}
    assert 'disc_spectrum' in report['results']
    assert os.path.isfile(out / 'reports.csv')


def test_verify_violated(write_json, tmp_path):
    out = tmp_path / 'out'
    path = write_json('m.json', verify_manifest(out, {'upper': 1.0}))
    assert main.main(['verify', '--manifest', path]) == 4
    report = read(out / 'report.json')
    assert report['reports'][0]['verdict'] == 'Violated'


def test_verify_seed_overrides_manifest(write_json, tmp_path):
    out = tmp_path / 'out'
    manifest = dict(verify_manifest(out, {'lower': 1.0}), seed=3)
    path = write_json('m.json', manifest)
    assert main.main(['verify', '--manifest', path]) == 0
    assert read(out / 'report.json')['seed'] == 3
    assert main.main(['verify', '--manifest', path, '--seed', '7']) == 0
    assert read(out / 'report.json')['seed'] == 7


def test_verify_out_overrides_manifest(write_json, tmp_path):
    out = tmp_path / 'elsewhere'
    path = write_json('m.json', verify_manifest(tmp_path / 'out', {'lower': 1.0}))
    assert main.main(['verify', '--manifest', path, '--out', str(out)]) == 0
    assert os.path.isfile(out / 'report.json')


def test_exact_comparison_within_error_bar_is_inconclusive(write_json, tmp_path):
    out = tmp_path / 'out'
    disc = dict(DISC, resolution=8)
    params = {'refinements': 2, 'lower': 5.783185962946784, 'upper': 5.783185962946784}
    path = write_json('m.json', verify_manifest(out, params, tolerance=0.0, scene=disc))
    assert main.main(['verify', '--manifest', path]) == 0
    verdicts = [r['verdict'] for r in read(out / 'report.json')['reports']]
    assert 'Violated' not in verdicts
    assert 'Inconclusive' in verdicts


def test_verify_mass_concentration(write_json, tmp_path):
    out = tmp_path / 'out'
    cylinder = {'id': 'cyl', 'model': 'warped_cylinder', 'warp': {'kind': 'constant'},
                'x_range': [0.0, 0.5], 'circumference': 1.0, 'resolution': 16}
    manifest = {'schema': 1, 'output': str(out), 'scenes': [cylinder], 'experiments': [
        {'id': 'mass', 'scene': 'cyl', 'operation': 'mass_concentration', 'params': {'radii': [0.125, 0.25, 0.375]}}]}
    assert main.main(['verify', '--manifest', write_json('m.json', manifest)]) == 0
    report = read(out / 'report.json')
    assert report['reports'] == []
    masses = report['results']['mass']['masses']
    assert masses == sorted(masses)
    assert masses[1] == pytest.approx(0.5, abs=1e-6)


def test_verify_unknown_scene(write_json, tmp_path):
    manifest = verify_manifest(tmp_path, {})
    manifest['experiments'][0]['scene'] = 'nowhere'
    assert main.main(['verify', '--manifest', write_json('m.json', manifest)]) == 2


# ----------------------------------------------------------------------
# plots

PLOT_INPUTS = {
    'candidates.json': {'schema': 1, 'rows': [
        {'id': 0, 'family': 'Ball', 'parameter': 0.5, 'lambda0': 9.0, 'valid': True},
        {'id': 1, 'family': 'Ball', 'parameter': 1.0, 'lambda0': 2.5, 'valid': True},
        {'id': 2, 'family': 'Collar', 'parameter': 0.4, 'lambda0': 3.1, 'valid': True},
        {'id': 3, 'family': 'Collar', 'parameter': 0.2, 'lambda0': None, 'valid': False},
    ]},
    'sandwich.json': {'schema': 1, 'systole': 3.0571, 'chi': -2, 'upper_estimate': 1.2, 'side': 'TwoSided'},
    'cover.json': {'schema': 1, 'rows': [
        {'k': 2, 'cover': 'chain', 'lambda0': 2.47, 'area': 2.0},
        {'k': 2, 'cover': 'closed', 'lambda0': 0.0, 'area': 2.0},
        {'k': 4, 'cover': 'chain', 'lambda0': 0.62, 'area': 4.0},
    ]},
}


def test_plots_are_deterministic(tmp_path):
    results = tmp_path / 'results'
    writer = ResultWriter(str(results))
    for name, data in PLOT_INPUTS.items():
        writer.write_json(name, data)
    svgs = []
    for run in ('a', 'b'):
        assert main.main(['plot', '--results', str(results), '--out', str(tmp_path / run)]) == 0
        svgs.append({name: (tmp_path / run / name).read_bytes()
                     for name in ('candidates.svg', 'sandwich.svg', 'cover.svg')})
    assert svgs[0] == svgs[1]
    assert svgs[0]['cover.svg'].startswith(b'<?xml')


def test_plot_without_results(tmp_path):
    assert main.main(['plot', '--results', str(tmp_path)]) == 2


# ----------------------------------------------------------------------
# result files

def test_rounding():
    assert round_significant(1.23456789, 3) == 1.23
    assert round_significant(0.0, 3) == 0.0
    data = rounded({'a': (1.0 / 3.0, float('inf')), 'b': True, 2: 7}, 4)
    assert data == {'a': [0.3333, 'inf'], 'b': True, '2': 7}


def test_result_writer(tmp_path):
    writer = ResultWriter(str(tmp_path / 'w'), digits=5)
    assert writer.write_json('x.json', {'b': 2.0 / 3.0, 'a': 1})
    assert writer.read_json('x.json') == {'a': 1, 'b': 0.66667}
    assert writer.read_json('missing.json') is None
    assert writer.write_csv('x.csv', [{'k': 1, 'v': 0.5}, {'k': 2, 'v': 0.25}])
    assert (tmp_path / 'w' / 'x.csv').read_text() == 'k,v\n1,0.5\n2,0.25\n'
