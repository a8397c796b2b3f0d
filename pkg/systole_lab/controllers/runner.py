'''
Command implementations: load scenes or manifests, run the lab
operations and hand the results to the ResultWriter and the plots.

Each cmd_* returns the process exit code for a successful run (0, or 4
when a report is Violated); failures propagate as exceptions and are
mapped to exit codes by main.
'''

import logging
import os

import numpy as np

from systole_lab.config import settings
from systole_lab.geometry.cmpfun import Side
from systole_lab.geometry.geodesics import (
    collar,
    fuchsian_lengths,
    lattice_systole,
    metric_ball,
    shortest_essential_loop,
    systole_upper,
)
from systole_lab.geometry.surface import build_exhaustion, export_edge_lengths, export_off, extract_subsurface, whole
from systole_lab.lab import bounds, experiments
from systole_lab.lab.candidates import SearchConfig, default_core, lambda_upper
from systole_lab.lab.manifest import build_scene, load_manifest, load_scene
from systole_lab.lab.reports import InequalityReport, ReportBundle, Verdict
from systole_lab.spectral.solver import extrapolate, lambda0, lambda0_refined, lambda_k
from systole_lab.spectral.sweep import sweep
from systole_lab.utils.data_handler import ResultWriter, rounded
from systole_lab.utils.errors import MissingInput, PositiveChi, SchemaError
from systole_lab.views import plots

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 4


def _writer(out):
    digits = int(settings.section('report').get('significant_digits', 12))
    return ResultWriter(out, digits)


def _version():
    return settings.app_info.get('software', {}).get('version', '')


def export_mesh(S, name, writer):
    '''<name>.off and <name>_edges.csv next to the other results; the OFF file needs vertex positions.'''
    export_edge_lengths(S, writer.path(f'{name}_edges.csv'))
    if S.positions is None:
        logger.warning(f'Runner: {name} has no vertex positions, OFF export skipped')
        return
    export_off(S, writer.path(f'{name}.off'))


def refinement_resolutions(base, refinements):
    '''base, 2 base, 4 base, ... (refinements entries).'''
    return [int(base) * 2 ** i for i in range(int(refinements))]


def _candidate_rows(upper, experiment=''):
    rows = []
    for record in upper.records:
        row = record.row().model_dump()
        if experiment:
            row = {'experiment': experiment, **row}
        rows.append(row)
    return rows


# ----------------------------------------------------------------------
# region selection for manifest experiments

def select_region(S, params):
    '''
    The subsurface an experiment works on.

    params['region'] kinds: whole (default), ball {center, radius},
    collar {width, core}, radial {radius}.
    '''
    spec = dict(params.get('region') or {'kind': 'whole'})
    kind = spec.get('kind', 'whole')
    if kind == 'whole':
        return whole(S, label=S.model)
    if kind == 'ball':
        return metric_ball(S, int(spec.get('center', 0)), float(spec['radius']))
    if kind == 'collar':
        core = spec.get('core')
        if core is None:
            loop = default_core(S)
            if loop is None:
                raise SchemaError(f'{S.model} has no default collar core')
            core = loop.vertices
        return collar(S, np.asarray(core, dtype=np.int64), float(spec['width']))
    if kind == 'radial':
        if S.radial is None:
            raise SchemaError(f'{S.model} has no radial coordinate')
        return extract_subsurface(S, S.centroid_values(S.radial) <= float(spec['radius']),
                                  label=f'radial({spec["radius"]})')
    raise SchemaError(f'unknown region kind {kind!r}')


def range_reports(name, value, params, tolerance, error_bar=0.0, instance=''):
    '''Reports for params['lower'] <= value <= params['upper'] (either side optional).'''
    out = []
    if params.get('lower') is not None:
        out.append(InequalityReport.evaluate(f'{name}_lower', value, float(params['lower']), tolerance,
                                             error_bar, instance))
    if params.get('upper') is not None:
        out.append(InequalityReport.evaluate(f'{name}_upper', float(params['upper']), value, tolerance,
                                             error_bar, instance))
    return out


def _search_config(params, jobs, tol):
    keys = set(SearchConfig.model_fields)
    overrides = {k: v for k, v in params.get('search', {}).items() if k in keys}
    overrides.setdefault('jobs', jobs)
    overrides.setdefault('tol', tol)
    return SearchConfig.from_settings(**overrides)


# ----------------------------------------------------------------------
# experiment operations

class ExperimentRunner:
    '''
    Runs the experiments of one manifest. Surfaces and upper estimates are
    cached per scene so several experiments can share them.
    '''

    def __init__(self, manifest, jobs=None, tol=None):
        self.manifest = manifest
        self.jobs = jobs
        self.tol = tol
        self.default_tolerance = bounds.default_tolerance()
        self._surfaces = {}
        self._uppers = {}
        self.candidate_rows = []
        self.sandwich = None
        self.cover = None

    def surface(self, scene_id):
        if scene_id not in self._surfaces:
            self._surfaces[scene_id] = build_scene(self.manifest.scene(scene_id))
        return self._surfaces[scene_id]

    def upper(self, exp):
        key = (exp.scene, repr(sorted(exp.params.get('search', {}).items())))
        if key not in self._uppers:
            config = _search_config(exp.params, self.jobs, self.tol)
            upper = lambda_upper(self.surface(exp.scene), config)
            self._uppers[key] = upper
            self.candidate_rows.extend(_candidate_rows(upper, exp.id))
        return self._uppers[key]

    def run(self, exp):
        '''
        Returns:
            (reports, results) for one experiment
        '''
        tolerance = self.manifest.tolerance_for(exp, self.default_tolerance)
        handler = getattr(self, f'op_{exp.operation}')
        logger.info(f'ExperimentRunner: {exp.id} ({exp.operation} on {exp.scene})')
        reports, results = handler(exp, dict(exp.params), tolerance)
        return reports, results

    # -- spectra

    def op_spectrum(self, exp, params, tolerance):
        spec = self.manifest.scene(exp.scene)
        refinements = int(params.get('refinements', 1))
        if refinements >= 2:
            resolutions = refinement_resolutions(spec.resolution, refinements)
            result = lambda0_refined(lambda n: whole(build_scene(spec, n)), resolutions, tol=self.tol)
        else:
            result = lambda0(whole(self.surface(exp.scene)), tol=self.tol)
        reports = range_reports('spectrum', result.value, params, tolerance, result.error_bar, exp.id)
        return reports, result.to_dict()

    def op_systole(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        loop = systole_upper(S) if S.is_closed else shortest_essential_loop(S)
        if loop is None:
            raise PositiveChi(f'{S.model} has no essential loop')
        results = {'loop': loop.to_dict()}
        oracle = None
        if S.model == 'hyperbolic_octagon':
            oracle = fuchsian_lengths(S, int(params.get('cap', bounds.FUCHSIAN_CAP)))[0]
        elif S.model == 'flat_torus':
            oracle = lattice_systole(*S.model_data['basis'])
        reports = []
        if oracle is not None:
            results['oracle'] = oracle
            results['relative_gap'] = (loop.length - oracle) / oracle
            reports.append(InequalityReport.evaluate('systole_upper_bound', loop.length, oracle,
                                                     tolerance, instance=exp.id))
            reports += range_reports('systole', loop.length, params, tolerance, instance=exp.id)
        return reports, results

    # -- analytic systole

    def op_lambda_upper(self, exp, params, tolerance):
        upper = self.upper(exp)
        results = {'upper': upper.value, 'best': upper.best.row().model_dump(),
                   'valid': len(upper.valid_records), 'candidates': len(upper.records)}
        return range_reports('lambda_upper', upper.value, params, tolerance, instance=exp.id), results

    def op_lower_bound(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        sys = bounds.certified_systole(S)
        value = bounds.lambda_lower_bound(S, float(params.get('kappa', 0.0)), sys.value)
        results = {'lower_bound': value, 'systole': sys.value, 'certified': sys.certified, 'source': sys.source}
        return range_reports('lower_bound', value, params, tolerance, instance=exp.id), results

    def op_candidate_lower_bound(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        upper = self.upper(exp)
        report = bounds.check_candidates_above_lower_bound(S, upper.records, float(params.get('kappa', 0.0)),
                                                           tolerance, exp.id)
        return [report], {'upper': upper.value}

    def op_brooks(self, exp, params, tolerance):
        upper = self.upper(exp)
        return [bounds.check_brooks(upper.records, tolerance, exp.id)], {'upper': upper.value}

    def op_sandwich(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        upper = self.upper(exp)
        low, high = bounds.check_sandwich(S, upper, tolerance, exp.id)
        lower, upper_bound, sys, w = bounds.sandwich_bounds(S)
        self.sandwich = {
            'systole': sys.value,
            'chi': S.chi,
            'side': (Side.ONE_SIDED if sys.one_sided else Side.TWO_SIDED).value,
            'upper_estimate': upper.value,
            'lower_bound': lower,
            'upper_bound': upper_bound,
            'width': w,
        }
        return [low, high], dict(self.sandwich)

    def op_eigenvalue_bound(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        upper = self.upper(exp) if params.get('with_upper', False) else None
        report = bounds.check_eigenvalue_bound(S, float(params.get('kappa', -1.0)), upper, tolerance, exp.id)
        return [report], {}

    # -- subsurface inequalities

    def op_isoperimetric(self, exp, params, tolerance):
        F = select_region(self.surface(exp.scene), params)
        reports = bounds.check_isoperimetric(F, float(params.get('kappa', 0.0)),
                                             bool(params.get('certified_bound', False)), tolerance, exp.id)
        return reports, {'area': F.area, 'boundary_length': F.boundary_length, 'class': F.topo_class.value}

    def op_cheeger(self, exp, params, tolerance):
        F = select_region(self.surface(exp.scene), params)
        result = lambda0(F, tol=self.tol)
        h = params.get('cheeger')
        report = bounds.check_cheeger(F, None if h is None else float(h), result, tolerance, exp.id)
        return [report], {'lambda0': result.lambda0, 'cheeger_upper': bounds.cheeger_upper(F, result)}

    def op_sweep(self, exp, params, tolerance):
        F = select_region(self.surface(exp.scene), params)
        result = lambda0(F, tol=self.tol)
        profile = sweep(F, result.ground_state ** 2)
        report = bounds.check_ground_state_sweep(F, result, tolerance, exp.id)
        results = {'cavalieri_error': profile.cavalieri_error, 'coarea_error': profile.coarea_error,
                   'cheeger_upper': profile.cheeger_ratio()}
        return [report], results

    def op_core_length(self, exp, params, tolerance):
        F = select_region(self.surface(exp.scene), params)
        report = experiments.core_length_diagnostic(F, float(params.get('delta', 0.25)), tolerance, exp.id)
        return [report], {}

    # -- families

    def op_ess_spectrum(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        fam = build_exhaustion(S, params['radii'])
        estimate = experiments.ess_spectrum_estimate(fam, params.get('far'), params.get('far_fraction'), self.tol)
        reports = range_reports('ess_spectrum', estimate.limit_estimate, params, tolerance,
                                estimate.sensitivity if params.get('sensitivity_bar') else 0.0, exp.id)
        reports.append(InequalityReport.evaluate(
            'ess_spectrum_monotone', float(estimate.monotone), 1.0, 0.0, instance=exp.id))
        return reports, estimate.to_dict()

    def op_mass_concentration(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        fam = build_exhaustion(S, params['radii'])
        F = select_region(S, params)
        result = lambda0(F, tol=self.tol)
        mass = experiments.mass_concentration(F, fam, result)
        experiments.inradius_diagnostic(F, fam, result)
        return [], {'masses': list(mass.masses), 'constant': mass.constant}

    def op_cover(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        core = systole_upper(S)
        table = experiments.cover_experiment(S, core, params.get('ks', [2, 4, 8]),
                                             bool(params.get('closed', True)), self.tol)
        rows = [r.to_dict() for r in table.rows]
        self.cover = {'rows': rows, 'exponent': table.exponent}
        reports = range_reports('cover_exponent', table.exponent, params, tolerance, instance=exp.id)
        expected = params.get('expected')
        if expected:
            # expected: {k: value} for chain covers
            for row in table.chain():
                if str(row.sheets) in expected:
                    value = float(expected[str(row.sheets)])
                    reports += range_reports(f'cover_k{row.sheets}', row.lambda0,
                                             {'lower': value, 'upper': value}, tolerance, instance=exp.id)
        return reports, dict(self.cover)

    def op_conformal(self, exp, params, tolerance):
        S = self.surface(exp.scene)
        rows = experiments.conformal_experiment(S, params.get('ts', [0.0, 0.5, 1.0]), float(params['core_radius']),
                                                float(params.get('transition', 1.0)), params.get('ess_radii'),
                                                tol=self.tol)
        reports = [InequalityReport.evaluate('conformal_core_invariance', float(all(r.identical for r in rows)),
                                             1.0, 0.0, instance=exp.id)]
        for r in rows:
            if r.t != 0.0:
                bound = {'lower': r.expected_ratio, 'upper': r.expected_ratio}
                reports += range_reports(f'conformal_ess_ratio_t{r.t:g}', r.ess_ratio, bound, tolerance,
                                         instance=exp.id)
        return reports, {'rows': [r.to_dict() for r in rows]}


# ----------------------------------------------------------------------
# commands

def cmd_spectrum(scene, out, refinements=None, tol=None, mesh=False):
    '''lambda0 of a scene, with nested refinements and extrapolation when refinements >= 2.'''
    spec = load_scene(scene)
    writer = _writer(out)
    refinements = int(refinements or 1)
    resolutions = refinement_resolutions(spec.resolution, refinements)
    rows = []
    results = []
    for n in resolutions:
        S = build_scene(spec, n)
        result = lambda0(whole(S, label=spec.id), tol=tol)
        results.append(result)
        rows.append({'resolution': n, 'lambda0': result.lambda0, 'rayleigh': result.rayleigh,
                     'mesh_h': result.mesh_h, 'iterations': result.iterations})
    data = {'schema': 1, 'scene': spec.id, 'rows': rows}
    if len(resolutions) >= 2:
        ext = extrapolate([r.lambda0 for r in results], resolutions, tol)
        data['extrapolated'] = {'value': ext.value, 'error_bar': ext.error_bar, 'monotone': ext.monotone}
    if S.is_closed:
        data['lambda_k'] = lambda_k(S, 4, tol)
    writer.write_csv('spectrum.csv', rows)
    writer.write_json('spectrum.json', data)
    if mesh:
        export_mesh(S, spec.id, writer)
    logger.info(f'Runner: spectrum of {spec.id}: {rows[-1]["lambda0"]:.10g}')
    return EXIT_OK


def cmd_systole(scene, out, mesh=False):
    spec = load_scene(scene)
    S = build_scene(spec)
    loop = systole_upper(S) if S.is_closed else shortest_essential_loop(S)
    if loop is None:
        raise PositiveChi(f'{spec.id} has no essential loop')
    data = {'schema': 1, 'scene': spec.id, 'loop': loop.to_dict()}
    if S.model == 'hyperbolic_octagon':
        lengths = fuchsian_lengths(S, bounds.FUCHSIAN_CAP)
        data['fuchsian_lengths'] = lengths[:8]
        data['relative_gap'] = (loop.length - lengths[0]) / lengths[0]
    elif S.model == 'flat_torus':
        oracle = lattice_systole(*S.model_data['basis'])
        data['lattice_systole'] = oracle
        data['relative_gap'] = (loop.length - oracle) / oracle
    writer = _writer(out)
    writer.write_json('systole.json', data)
    if mesh:
        export_mesh(S, spec.id, writer)
    return EXIT_OK


def cmd_lambda(scene, out, jobs=None, tol=None):
    '''Upper estimate of the analytic systole with the candidate table and, when defined, the lower bound.'''
    spec = load_scene(scene)
    S = build_scene(spec)
    upper = lambda_upper(S, SearchConfig.from_settings(jobs=jobs, tol=tol))
    rows = _candidate_rows(upper)
    data = {'schema': 1, 'scene': spec.id, 'upper': upper.value, 'best': upper.best.row().model_dump()}
    if S.is_closed and S.chi <= 0 and S.curvature is not None:
        kappa = float(np.max(S.curvature))
        data['kappa'] = kappa
        data['lower_bound'] = bounds.lambda_lower_bound(S, kappa)
    writer = _writer(out)
    writer.write_csv('candidates.csv', rows)
    writer.write_json('candidates.json', {'schema': 1, 'rows': rows})
    writer.write_json('lambda.json', data)
    return EXIT_OK


def cmd_cover(scene, out, ks=(2, 4, 8), tol=None):
    spec = load_scene(scene)
    S = build_scene(spec)
    table = experiments.cover_experiment(S, systole_upper(S), ks, tol=tol)
    rows = [r.to_dict() for r in table.rows]
    writer = _writer(out)
    writer.write_csv('cover.csv', rows)
    writer.write_json('cover.json', {'schema': 1, 'scene': spec.id, 'rows': rows, 'exponent': table.exponent})
    return EXIT_OK


def cmd_verify(manifest, out=None, jobs=None, tol=None, seed=None):
    '''
    Run every experiment of a manifest and write the report bundle.

    Returns:
        0 when no report is Violated, 4 otherwise
    '''
    man = load_manifest(manifest)
    writer = _writer(out or man.output)
    runner = ExperimentRunner(man, jobs=jobs, tol=tol)
    reports = []
    results = {}
    for exp in man.experiments:
        exp_reports, exp_results = runner.run(exp)
        reports.extend(exp_reports)
        results[exp.id] = rounded(exp_results, writer.digits)

    seed = man.seed if seed is None else seed
    bundle = ReportBundle(version=man.version or _version(), seed=seed, reports=reports, results=results)
    writer.write_json('report.json', bundle.model_dump(mode='json', by_alias=True))
    writer.write_csv('reports.csv', [r.row() for r in bundle.reports])
    if runner.candidate_rows:
        writer.write_csv('candidates.csv', runner.candidate_rows)
        writer.write_json('candidates.json', {'schema': 1, 'rows': runner.candidate_rows})
    if runner.sandwich:
        writer.write_json('sandwich.json', {'schema': 1, **runner.sandwich})
    if runner.cover:
        writer.write_json('cover.json', {'schema': 1, **runner.cover})

    inconclusive = [r for r in bundle.reports if r.verdict is Verdict.INCONCLUSIVE]
    violated = [r for r in bundle.reports if r.verdict is Verdict.VIOLATED]
    for r in inconclusive:
        logger.info(f'Runner: inconclusive {r.name} [{r.instance}] gap={r.gap:.6g} error_bar={r.error_bar:.3g}')
    for r in violated:
        logger.error(f'Runner: VIOLATED {r.name} [{r.instance}] lhs={r.lhs:.8g} rhs={r.rhs:.8g}')
    logger.info(f'Runner: {len(bundle.reports)} reports, {len(inconclusive)} inconclusive, {len(violated)} violated')
    return EXIT_VIOLATED if violated else EXIT_OK


def cmd_plot(results, out=None):
    '''
    Render every plot whose input exists in the results directory.

    Raises:
        MissingInput: nothing to plot
    '''
    source = _writer(results)
    target = out or results
    os.makedirs(target, exist_ok=True)
    written = 0
    candidates = source.read_json('candidates.json')
    if candidates and candidates.get('rows'):
        written += plots.plot_candidates(candidates['rows'], os.path.join(target, 'candidates.svg'))
    sandwich = source.read_json('sandwich.json')
    if sandwich:
        written += plots.plot_sandwich(sandwich, os.path.join(target, 'sandwich.svg'))
    cover = source.read_json('cover.json')
    if cover and cover.get('rows'):
        written += plots.plot_cover(cover['rows'], os.path.join(target, 'cover.svg'))
    if not written:
        raise MissingInput(f'no plottable results in {results}')
    return EXIT_OK
