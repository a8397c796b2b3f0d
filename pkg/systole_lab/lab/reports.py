'''
Inequality reports and the verdict rule.

A report compares lhs against rhs for an inequality written as
lhs >= rhs. `tolerance` is relative to the larger of |lhs| and |rhs|;
`error_bar` is an absolute discretization estimate on the gap.
'''

import enum
import logging
import math
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class Verdict(str, enum.Enum):
    HOLDS = 'Holds'
    VIOLATED = 'Violated'
    INCONCLUSIVE = 'Inconclusive'


def decide(lhs, rhs, tolerance, error_bar=0.0):
    '''
    Holds when gap - error_bar >= -tol, Violated when gap + error_bar < -tol,
    Inconclusive otherwise, with gap = lhs - rhs and tol scaled to the
    magnitude of the compared values.
    '''
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return Verdict.INCONCLUSIVE
    gap = lhs - rhs
    tol = tolerance * max(abs(lhs), abs(rhs))
    if gap - error_bar >= -tol:
        return Verdict.HOLDS
    if gap + error_bar < -tol:
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


class InequalityReport(BaseModel):
    '''One inequality evaluated on one scene.'''

    schema_version: int = Field(default=SCHEMA_VERSION, alias='schema')
    name: str
    instance: str = ''
    lhs: float
    rhs: float
    tolerance: float = Field(ge=0.0)
    error_bar: float = Field(default=0.0, ge=0.0)
    verdict: Verdict
    notes: List[str] = Field(default_factory=list)

    model_config = {'populate_by_name': True}

    @property
    def gap(self):
        return self.lhs - self.rhs

    @classmethod
    def evaluate(cls, name, lhs, rhs, tolerance, error_bar=0.0, instance='', notes=()):
        verdict = decide(float(lhs), float(rhs), float(tolerance), float(error_bar))
        report = cls(name=name, instance=instance, lhs=float(lhs), rhs=float(rhs),
                     tolerance=float(tolerance), error_bar=float(error_bar),
                     verdict=verdict, notes=list(notes))
        level = logging.WARNING if verdict is Verdict.VIOLATED else logging.INFO
        logger.log(level, f'Report: {name} [{instance}] lhs={report.lhs:.8g} rhs={report.rhs:.8g} '
                          f'-> {verdict.value}')
        return report

    def row(self):
        '''Flat dict for CSV output.'''
        return {
            'name': self.name,
            'instance': self.instance,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'gap': self.gap,
            'tolerance': self.tolerance,
            'error_bar': self.error_bar,
            'verdict': self.verdict.value,
            'notes': '; '.join(self.notes),
        }


class CandidateRow(BaseModel):
    '''JSON/CSV view of a candidate subsurface.'''

    id: int
    family: str
    parameter: float
    center: Optional[int] = None
    topo_class: str
    chi: int
    area: float
    boundary_length: float
    lambda0: Optional[float] = None
    incompressibility: Optional[str] = None
    valid: bool
    error: Optional[str] = None


class ReportBundle(BaseModel):
    '''Everything a run writes to report.json.'''

    schema_version: int = Field(default=SCHEMA_VERSION, alias='schema')
    version: str = ''
    seed: int = 0
    reports: List[InequalityReport] = Field(default_factory=list)
    results: dict = Field(default_factory=dict)

    model_config = {'populate_by_name': True}

    @field_validator('reports')
    @classmethod
    def _sorted(cls, value):
        return sorted(value, key=lambda r: (r.instance, r.name))

    @property
    def any_violated(self):
        return any(r.verdict is Verdict.VIOLATED for r in self.reports)
