'''
Upper estimate of the analytic systole: the minimum first Dirichlet
eigenvalue over explicit disc, annulus and cross-cap candidates.

Candidate families:
- metric balls around spread-out centres;
- collars around the systolic loop (or the core of an annulus);
- connected components of superlevel sets of an eigenfunction squared.

Candidates are numbered when generated, solved on a thread pool and
merged back in id order.
'''

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.sparse.csgraph import connected_components

from systole_lab.config import settings
from systole_lab.geometry.cmpfun import Side, collar_width
from systole_lab.geometry.covers import Compressibility, classify_incompressible
from systole_lab.geometry.geodesics import (
    LoopResult,
    collar,
    distance_graph,
    homology_of,
    metric_ball,
    shortest_essential_loop,
    shortest_in_homotopy_class,
    systole_upper,
)
from systole_lab.geometry.surface import (
    VALID_CLASSES,
    MetricSurface,
    Subsurface,
    TopoClass,
    extract_subsurface,
    whole,
)
from systole_lab.lab.reports import CandidateRow
from systole_lab.spectral.solver import SpectralResult, eigenpairs, lambda0
from systole_lab.utils.errors import EmptySelection, NoValidCandidate, SystoleLabError

logger = logging.getLogger(__name__)

# numerical failures recorded on the candidate row; anything else propagates
# (scipy's splu raises RuntimeError on a singular factor)
CANDIDATE_FAILURES = (SystoleLabError, np.linalg.LinAlgError, RuntimeError)


class Family(str, enum.Enum):
    BALL = 'Ball'
    COLLAR = 'Collar'
    SUPERLEVEL = 'Superlevel'


class SearchConfig(BaseModel):
    '''Candidate grids; unset grids are derived from the surface.'''

    families: List[Family] = Field(default_factory=lambda: list(Family))
    n_centers: int = Field(default=4, ge=1)
    centers: Optional[List[int]] = None
    n_radii: int = Field(default=12, ge=1)
    radii: Optional[List[float]] = None
    cores: Optional[List[List[int]]] = None
    n_widths: int = Field(default=12, ge=1)
    widths: Optional[List[float]] = None
    superlevel_quantiles: int = Field(default=8, ge=1)
    superlevel_max_components: int = Field(default=4, ge=1)
    jobs: Optional[int] = None
    tol: Optional[float] = None

    @classmethod
    def from_settings(cls, **overrides):
        cfg = settings.section('candidates')
        values = {
            'n_centers': cfg.get('n_centers', 4),
            'n_radii': cfg.get('n_radii', 12),
            'n_widths': cfg.get('n_widths', 12),
            'superlevel_quantiles': cfg.get('superlevel_quantiles', 8),
            'superlevel_max_components': cfg.get('superlevel_max_components', 4),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(eq=False)
class CandidateRecord:
    id: int
    family: Family
    parameter: float
    subsurface: Subsurface
    center: Optional[int] = None
    result: Optional[SpectralResult] = None
    incompressibility: Optional[Compressibility] = None
    error: Optional[str] = None

    @property
    def topo_class(self):
        return self.subsurface.topo_class

    @property
    def valid(self):
        return self.topo_class in VALID_CLASSES and self.result is not None

    @property
    def lambda0(self):
        return self.result.lambda0 if self.result is not None else math.nan

    def row(self):
        sub = self.subsurface
        return CandidateRow(
            id=self.id,
            family=self.family.value,
            parameter=self.parameter,
            center=self.center,
            topo_class=self.topo_class.value,
            chi=sub.chi,
            area=sub.area,
            boundary_length=sub.boundary_length,
            lambda0=self.result.lambda0 if self.result is not None else None,
            incompressibility=self.incompressibility.value if self.incompressibility else None,
            valid=self.valid,
            error=self.error,
        )


@dataclass(eq=False)
class LambdaUpper:
    value: float
    best: CandidateRecord
    records: List[CandidateRecord]

    @property
    def valid_records(self):
        return [r for r in self.records if r.valid]


# ----------------------------------------------------------------------
# candidate generation

def spread_centers(S: MetricSurface, n):
    '''Farthest-point sampling from vertex 0 (or the first used vertex).'''
    graph = distance_graph(S, True)
    used = np.nonzero(S.used_vertices)[0]
    centers = [int(used[0])]
    nearest = graph.distance_from(centers)
    for _ in range(n - 1):
        far = np.where(S.used_vertices, nearest, -np.inf)
        pick = int(np.argmax(far))
        if not np.isfinite(far[pick]) or far[pick] <= 0:
            break
        centers.append(pick)
        nearest = np.minimum(nearest, graph.distance_from([pick]))
    return centers


def _eccentricity(S: MetricSurface, sources):
    d = distance_graph(S, True).distance_from(sources)
    d = d[S.used_vertices]
    return float(np.max(d[np.isfinite(d)]))


def ball_candidates(S: MetricSurface, config: SearchConfig):
    centers = config.centers or spread_centers(S, config.n_centers)
    h = S.mean_edge_length
    out = []
    for c in centers:
        if config.radii:
            radii = np.asarray(config.radii, dtype=float)
        else:
            diameter = max(_eccentricity(S, [c]), 2.0 * h)
            radii = np.geomspace(2.0 * h, max(diameter, 2.0 * h), config.n_radii)
        for r in radii:
            out.append((Family.BALL, float(r), int(c), lambda r=r, c=c: metric_ball(S, c, r)))
    return out


def default_core(S: MetricSurface) -> Optional[LoopResult]:
    '''Systolic loop of a closed surface, core loop of an annulus, else the shortest essential loop.'''
    if S.is_closed:
        if S.chi > 0:
            return None
        return systole_upper(S)
    F = whole(S)
    if F.topo_class in (TopoClass.ANNULUS, TopoClass.CROSS_CAP):
        return shortest_in_homotopy_class(F, certify=False)
    return shortest_essential_loop(S)


def collar_candidates(S: MetricSurface, config: SearchConfig):
    if config.cores:
        cores = [(np.asarray(c, dtype=np.int64), None) for c in config.cores]
    else:
        loop = default_core(S)
        cores = [] if loop is None else [(loop.vertices, loop)]
    h = S.mean_edge_length
    basis = homology_of(S)
    out = []
    for vertices, loop in cores:
        if loop is not None:
            length, one_sided = loop.length, loop.one_sided
        else:
            ids, _ = basis.path_edges(vertices)
            length = float(S.edge_lengths[ids].sum())
            one_sided = basis.path_one_sided(vertices)
        side = Side.ONE_SIDED if one_sided else Side.TWO_SIDED
        if config.widths:
            widths = np.asarray(config.widths, dtype=float)
        else:
            w_max = min(collar_width(length, side), _eccentricity(S, vertices))
            widths = np.linspace(2.0 * h, max(w_max - 0.5 * h, 2.0 * h), config.n_widths)
        for w in widths:
            out.append((Family.COLLAR, float(w), None, lambda w=w, v=vertices: collar(S, v, w)))
    return out


def superlevel_density(S: MetricSurface, tol=None):
    '''Square of the first non-constant eigenfunction (closed S) or of the ground state.'''
    if S.is_closed:
        _, vectors = eigenpairs(S, 1, tol)
        return vectors[:, 1] ** 2
    return lambda0(whole(S), tol=tol).ground_state ** 2


def superlevel_components(S: MetricSurface, psi, threshold, max_components):
    '''Largest triangle components of {psi >= threshold} (by centroid value).'''
    mask = S.centroid_values(psi) >= threshold
    ids = np.nonzero(mask)[0]
    if ids.size == 0:
        return []
    adj = S.face_adjacency[ids][:, ids]
    n, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels, minlength=n)
    order = np.argsort(-sizes, kind='stable')[:max_components]
    return [ids[labels == c] for c in order]


def superlevel_candidates(S: MetricSurface, config: SearchConfig):
    psi = superlevel_density(S, config.tol)
    used = S.used_vertices
    levels = np.arange(1, config.superlevel_quantiles + 1) / (config.superlevel_quantiles + 1)
    thresholds = np.quantile(psi[used], levels)
    out = []
    for t in thresholds:
        for k, ids in enumerate(superlevel_components(S, psi, t, config.superlevel_max_components)):
            out.append((Family.SUPERLEVEL, float(t), None,
                        lambda ids=ids, t=t, k=k: extract_subsurface(S, ids, label=f'superlevel({t:.4g})#{k}')))
    return out


GENERATORS = {
    Family.BALL: ball_candidates,
    Family.COLLAR: collar_candidates,
    Family.SUPERLEVEL: superlevel_candidates,
}


# ----------------------------------------------------------------------
# evaluation

def _evaluate(record: CandidateRecord, tol):
    sub = record.subsurface
    if sub.topo_class not in VALID_CLASSES:
        return record
    try:
        record.result = lambda0(sub, tol=tol)
        if sub.topo_class in (TopoClass.ANNULUS, TopoClass.CROSS_CAP):
            record.incompressibility = classify_incompressible(sub)
    except CANDIDATE_FAILURES as e:
        record.result = None
        record.error = f'{type(e).__name__}: {e}'
        logger.warning(f'Candidates: candidate {record.id} ({record.family.value}) failed: {record.error}')
    return record


def build_candidates(S: MetricSurface, config: SearchConfig):
    records = []
    for family in config.families:
        try:
            specs = GENERATORS[family](S, config)
        except SystoleLabError as e:
            logger.warning(f'Candidates: {family.value} family unavailable: {type(e).__name__}: {e}')
            continue
        for fam, parameter, center, build in specs:
            try:
                sub = build()
            except EmptySelection:
                continue
            records.append(CandidateRecord(len(records), fam, parameter, sub, center=center))
    return records


def lambda_upper(S: MetricSurface, config: Optional[SearchConfig] = None):
    '''
    Minimum lambda0 over the valid candidates of S.

    Raises:
        NoValidCandidate: no candidate is a disc, annulus or cross cap with a solved lambda0
    '''
    config = config or SearchConfig.from_settings()
    # warm the shared caches before the pool starts
    homology_of(S)
    distance_graph(S, True)
    records = build_candidates(S, config)
    jobs = settings.job_count(config.jobs)
    logger.info(f'Candidates: evaluating {len(records)} candidates on {jobs} worker(s)')
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_evaluate, r, config.tol) for r in records]
            for future in as_completed(futures):
                future.result()
    else:
        for r in records:
            _evaluate(r, config.tol)
    records.sort(key=lambda r: r.id)

    valid = [r for r in records if r.valid]
    if not valid:
        raise NoValidCandidate(f'none of {len(records)} candidates is a solvable disc, annulus or cross cap')
    best = min(valid, key=lambda r: (r.lambda0, r.id))
    logger.info(f'Candidates: upper estimate {best.lambda0:.8g} from {best.family.value} '
                f'candidate {best.id} ({best.topo_class.value}), {len(valid)} valid')
    return LambdaUpper(best.lambda0, best, records)
