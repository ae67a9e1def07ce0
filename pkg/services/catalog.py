"""
이름 붙은 계량 Lie 대수 카탈로그

모든 항목은 단위 계량을 기본값으로 갖는다. 'abelianN' 과 'milnor(α,β,γ,δ)' 는
매개변수형 이름으로도 조회할 수 있다.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from services.errors import CatalogError, ValidationError
from services.lie_core import LieAlgebra, abelian, direct_sum, validate_algebra
from services.metric_geometry import MetricLieAlgebra

logger = logging.getLogger(__name__)

ABELIAN_PATTERN = re.compile(r"^abelian(\d+)$")
MILNOR_PATTERN = re.compile(r"^milnor\(([^,()]+),([^,()]+),([^,()]+),([^,()]+)\)$")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    builder: Callable[[], MetricLieAlgebra]
    description: str = ""
    tags: tuple[str, ...] = field(default_factory=tuple)

    def build(self) -> MetricLieAlgebra:
        return self.builder()


# ── 대수 생성 ──


def heis3() -> LieAlgebra:
    return LieAlgebra.from_brackets(3, [(0, 1, 2, 1.0)], name="heis3")


def heis5() -> LieAlgebra:
    return LieAlgebra.from_brackets(5, [(0, 1, 4, 1.0), (2, 3, 4, 1.0)], name="heis5")


def nil4() -> LieAlgebra:
    return LieAlgebra.from_brackets(4, [(0, 1, 2, 1.0), (0, 2, 3, 1.0)], name="nil4")


def sol3() -> LieAlgebra:
    # e3 가 diag(1, -1) 로 작용
    return LieAlgebra.from_brackets(3, [(2, 0, 0, 1.0), (2, 1, 1, -1.0)], name="sol3")


def sl2r() -> LieAlgebra:
    # (h, e, f): [h,e]=2e, [h,f]=-2f, [e,f]=h
    return LieAlgebra.from_brackets(
        3, [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)], name="sl2r"
    )


def euclidean2() -> LieAlgebra:
    # e3 가 (e1, e2) 평면의 회전으로 작용
    return LieAlgebra.from_brackets(3, [(2, 0, 1, 1.0), (2, 1, 0, -1.0)], name="e2")


def milnor(alpha: float, beta: float, gamma: float, delta: float) -> LieAlgebra:
    """
    3차원 비단모듈 Milnor 대수

    [e1,e2] = αe2 + βe3, [e1,e3] = γe2 + δe3, [e2,e3] = 0

    Raises:
        ValidationError: α+δ = 0 또는 αγ+βδ ≠ 0
    """
    if alpha + delta == 0:
        raise ValidationError(f"milnor parameters need α+δ ≠ 0 (got α={alpha}, δ={delta})")
    if alpha * gamma + beta * delta != 0:
        raise ValidationError(
            f"milnor parameters need αγ+βδ = 0 (got {alpha * gamma + beta * delta})"
        )
    name = f"milnor({_format_parameter(alpha)},{_format_parameter(beta)},"
    name += f"{_format_parameter(gamma)},{_format_parameter(delta)})"
    return LieAlgebra.from_brackets(
        3,
        [(0, 1, 1, alpha), (0, 1, 2, beta), (0, 2, 1, gamma), (0, 2, 2, delta)],
        name=name,
    )


def quaternionic_heisenberg() -> LieAlgebra:
    """
    7차원 사원수 Heisenberg 대수 (v = H, z = Im H)

    [v_p, v_q] = Σ_a L_a[q, p] z_a, L_a 는 i, j, k 의 왼쪽 곱셈 행렬 (기저 1, i, j, k).
    """
    left_i = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
    left_j = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    left_k = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)
    brackets = []
    for a, L in enumerate((left_i, left_j, left_k)):
        for p in range(4):
            for q in range(p + 1, 4):
                if L[q, p] != 0:
                    brackets.append((p, q, 4 + a, float(L[q, p])))
    return LieAlgebra.from_brackets(7, brackets, name="qheis7")


def heis3_plus_line() -> LieAlgebra:
    return direct_sum(heis3(), abelian(1), name="heis3xR")


def _format_parameter(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _identity_metric(builder: Callable[[], LieAlgebra]) -> Callable[[], MetricLieAlgebra]:
    def build() -> MetricLieAlgebra:
        return MetricLieAlgebra(validate_algebra(builder()))

    return build


def _abelian_entry(n: int) -> CatalogEntry:
    return CatalogEntry(
        name=f"abelian{n}",
        builder=_identity_metric(lambda: abelian(n)),
        description=f"{n}차원 가환 대수 (평탄)",
        tags=("nilpotent", "unimodular", "flat"),
    )


def _milnor_entry(alpha: float, beta: float, gamma: float, delta: float) -> CatalogEntry:
    alg = milnor(alpha, beta, gamma, delta)
    return CatalogEntry(
        name=alg.name,
        builder=_identity_metric(lambda: milnor(alpha, beta, gamma, delta)),
        description="3차원 비단모듈 Milnor 대수",
        tags=("solvable", "nonunimodular"),
    )


def catalog() -> list[CatalogEntry]:
    """카탈로그 항목 (고정 순서)"""
    return [
        _abelian_entry(2),
        _abelian_entry(3),
        CatalogEntry("heis3", _identity_metric(heis3), "3차원 Heisenberg (Nil3)", ("nilpotent", "two-step", "htype")),
        CatalogEntry("heis3xR", _identity_metric(heis3_plus_line), "Nil3 ⊕ R", ("nilpotent", "two-step")),
        CatalogEntry("heis5", _identity_metric(heis5), "5차원 Heisenberg", ("nilpotent", "two-step", "htype")),
        CatalogEntry("nil4", _identity_metric(nil4), "4차원 filiform (Nil4)", ("nilpotent",)),
        CatalogEntry("qheis7", _identity_metric(quaternionic_heisenberg), "사원수 Heisenberg", ("nilpotent", "two-step", "htype")),
        CatalogEntry("sol3", _identity_metric(sol3), "Sol3", ("solvable", "unimodular")),
        CatalogEntry("sl2r", _identity_metric(sl2r), "sl(2,R)", ("semisimple", "unimodular")),
        CatalogEntry("e2", _identity_metric(euclidean2), "평면 Euclid 운동군", ("solvable", "unimodular")),
        _milnor_entry(1.0, 0.0, 0.0, 1.0),
        _milnor_entry(1.0, 0.0, 0.0, 2.0),
    ]


def catalog_names() -> list[str]:
    return [entry.name for entry in catalog()]


def _parse_parameter(text: str, name: str) -> float:
    try:
        return float(text.strip())
    except ValueError as e:
        raise CatalogError(name, catalog_names()) from e


def get_entry(name: str) -> CatalogEntry:
    """
    이름으로 카탈로그 항목을 찾는다 (매개변수형 이름 포함).

    Raises:
        CatalogError: 알 수 없는 이름
    """
    key = name.strip()
    for entry in catalog():
        if entry.name == key:
            return entry

    match = ABELIAN_PATTERN.match(key)
    if match and int(match.group(1)) >= 1:
        return _abelian_entry(int(match.group(1)))

    match = MILNOR_PATTERN.match(key.replace(" ", ""))
    if match:
        params = [_parse_parameter(value, key) for value in match.groups()]
        return _milnor_entry(*params)

    raise CatalogError(key, catalog_names())


def get_algebra(name: str) -> MetricLieAlgebra:
    """카탈로그 이름 → 검증된 MetricLieAlgebra"""
    mla = get_entry(name).build()
    logger.debug(f"카탈로그 항목 로드: {mla.name} (dim {mla.dim})")
    return mla
