'''
Scene and run manifests.

A scene names a generator and its parameters; a manifest lists scenes,
experiments on them and the default tolerances. Both are JSON documents
carrying "schema": 1.
'''

import json
import logging
import os
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter, field_validator, model_validator

from systole_lab.geometry.cmpfun import WarpMode, constant_profile, funnel_warp, pinched_profile
from systole_lab.geometry.generators import (
    make_flat_disc,
    make_flat_torus,
    make_hyperbolic_disc,
    make_hyperbolic_octagon,
    make_klein_bottle_flat,
    make_round_sphere,
    make_warped_cylinder,
)
from systole_lab.lab.reports import SCHEMA_VERSION
from systole_lab.utils.errors import MissingInput, SchemaError

logger = logging.getLogger(__name__)

OPERATIONS = (
    'spectrum',
    'systole',
    'lambda_upper',
    'lower_bound',
    'candidate_lower_bound',
    'brooks',
    'sandwich',
    'isoperimetric',
    'cheeger',
    'sweep',
    'ess_spectrum',
    'cover',
    'conformal',
    'core_length',
    'eigenvalue_bound',
    'mass_concentration',
)


class _Versioned(BaseModel):
    schema_version: int = Field(default=SCHEMA_VERSION, alias='schema')

    model_config = {'populate_by_name': True, 'extra': 'forbid'}

    @field_validator('schema_version')
    @classmethod
    def _known_schema(cls, value):
        if value != SCHEMA_VERSION:
            raise ValueError(f'unsupported schema {value}, expected {SCHEMA_VERSION}')
        return value


class _Scene(_Versioned):
    id: str
    resolution: int = Field(default=16, ge=1)


class FlatTorusScene(_Scene):
    model: Literal['flat_torus']
    a: Tuple[float, float] = (1.0, 0.0)
    b: Tuple[float, float] = (0.0, 1.0)


class OctagonScene(_Scene):
    model: Literal['hyperbolic_octagon']


class WarpSpec(BaseModel):
    '''
    constant: j = value; cosh: j = cosh x; exp: j = exp x;
    funnel: j solves j'' + kappa j = 0 for a curvature profile that is -1
    up to `start` and blends to kappa_inf over `width`.
    '''
    kind: Literal['constant', 'cosh', 'exp', 'funnel']
    value: float = Field(default=1.0, gt=0.0)
    kappa_inf: float = -1.0
    start: float = 1.0
    width: float = Field(default=1.0, gt=0.0)
    mode: WarpMode = WarpMode.EXPANDING

    model_config = {'extra': 'forbid'}


class WarpedCylinderScene(_Scene):
    model: Literal['warped_cylinder']
    warp: WarpSpec
    x_range: Tuple[float, float]
    circumference: float = Field(gt=0.0)
    x_cells: Optional[int] = Field(default=None, ge=1)
    radial: Optional[Literal['x', 'abs']] = 'x'


class HyperbolicDiscScene(_Scene):
    model: Literal['hyperbolic_disc']
    radius: float = Field(gt=0.0)


class KleinBottleScene(_Scene):
    model: Literal['klein_bottle_flat']
    width: float = Field(default=1.0, gt=0.0)
    height: float = Field(default=1.0, gt=0.0)


class FlatDiscScene(_Scene):
    model: Literal['flat_disc']
    radius: float = Field(default=1.0, gt=0.0)


class SphereScene(_Scene):
    model: Literal['round_sphere']
    radius: float = Field(default=1.0, gt=0.0)


SceneSpec = Annotated[
    Union[FlatTorusScene, OctagonScene, WarpedCylinderScene, HyperbolicDiscScene,
          KleinBottleScene, FlatDiscScene, SphereScene],
    Field(discriminator='model'),
]
scene_adapter = TypeAdapter(SceneSpec)


class ExperimentSpec(BaseModel):
    id: str
    scene: str
    operation: Literal[OPERATIONS]
    params: Dict = Field(default_factory=dict)
    tolerance: Optional[float] = Field(default=None, ge=0.0)

    model_config = {'extra': 'forbid'}


class RunManifest(_Versioned):
    scenes: List[SceneSpec]
    experiments: List[ExperimentSpec] = Field(default_factory=list)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output: str = 'out'
    seed: int = 0
    version: str = ''

    @field_validator('tolerances')
    @classmethod
    def _non_negative(cls, value):
        bad = {k: v for k, v in value.items() if not v >= 0}
        if bad:
            raise ValueError(f'tolerances must be non-negative: {bad}')
        return value

    @model_validator(mode='after')
    def _references_resolve(self):
        ids = [s.id for s in self.scenes]
        if len(set(ids)) != len(ids):
            raise SchemaError(f'duplicate scene ids in {ids}')
        missing = sorted({e.scene for e in self.experiments} - set(ids))
        if missing:
            raise SchemaError(f'experiments reference unknown scenes {missing}')
        return self

    def scene(self, scene_id):
        for s in self.scenes:
            if s.id == scene_id:
                return s
        raise SchemaError(f'unknown scene {scene_id!r}')

    def tolerance_for(self, experiment: ExperimentSpec, default):
        if experiment.tolerance is not None:
            return experiment.tolerance
        return self.tolerances.get(experiment.operation, self.tolerances.get('default', default))


# ----------------------------------------------------------------------
# loading

def read_json(path):
    '''
    Raises:
        MissingInput: the file does not exist
        SchemaError: the file is not valid JSON
    '''
    if not os.path.isfile(path):
        raise MissingInput(f'no such file: {path}')
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f'{path} is not valid JSON: {e}') from e


def load_scene(path):
    data = read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f'{path} does not hold a scene object')
    return scene_adapter.validate_python(data)


def load_manifest(path):
    '''
    Parse a manifest. Scene entries may be inline objects or paths to scene
    files relative to the manifest.
    '''
    data = read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f'{path} does not hold a manifest object')
    base = os.path.dirname(os.path.abspath(path))
    scenes = []
    for entry in data.get('scenes', []):
        if isinstance(entry, str):
            scenes.append(read_json(os.path.join(base, entry)))
        else:
            scenes.append(entry)
    data = dict(data, scenes=scenes)
    manifest = RunManifest.model_validate(data)
    logger.info(f'Manifest: {len(manifest.scenes)} scenes, {len(manifest.experiments)} experiments from {path}')
    return manifest


# ----------------------------------------------------------------------
# scene construction

def build_warp(spec: WarpSpec, x_max):
    if spec.kind == 'constant':
        return spec.value
    if spec.kind == 'cosh':
        return np.cosh
    if spec.kind == 'exp':
        return np.exp
    if spec.mode is WarpMode.EXPANDING and spec.kappa_inf == -1.0:
        profile = constant_profile(-1.0)
    else:
        profile = pinched_profile(spec.kappa_inf, spec.start, spec.width)
    return funnel_warp(profile, spec.mode, x_max=x_max)


def build_scene(spec, resolution=None):
    '''MetricSurface for a scene, optionally at another resolution.'''
    n = int(resolution or spec.resolution)
    if isinstance(spec, FlatTorusScene):
        return make_flat_torus(spec.a, spec.b, n)
    if isinstance(spec, OctagonScene):
        return make_hyperbolic_octagon(n)
    if isinstance(spec, WarpedCylinderScene):
        x_max = max(abs(spec.x_range[0]), abs(spec.x_range[1]))
        warp = build_warp(spec.warp, x_max)
        return make_warped_cylinder(warp, spec.x_range, spec.circumference, n, spec.x_cells, spec.radial)
    if isinstance(spec, HyperbolicDiscScene):
        return make_hyperbolic_disc(spec.radius, n)
    if isinstance(spec, KleinBottleScene):
        return make_klein_bottle_flat(spec.width, spec.height, n)
    if isinstance(spec, FlatDiscScene):
        return make_flat_disc(spec.radius, n)
    if isinstance(spec, SphereScene):
        return make_round_sphere(spec.radius, n)
    raise SchemaError(f'unknown scene model {getattr(spec, "model", spec)!r}')
