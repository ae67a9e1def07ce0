"""
설정 로드 모듈

config/config.yaml 을 읽고 .env 및 환경변수로 일부 값을 덮어쓴다.
- LIESOLITON_CONFIG: 다른 설정 파일 경로
- LIESOLITON_TOL: tol_sol 덮어쓰기 (테스트 전용)
- LIESOLITON_LOG_LEVEL: 로깅 레벨 덮어쓰기
"""

import os
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import yaml
from dotenv import load_dotenv

from services.errors import ConfigError

logger = logging.getLogger(__name__)

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_CONFIG_PATH = os.path.join(BASE_DIR, "config", "config.yaml")


@dataclass(frozen=True)
class Tolerances:
    """수치 판정 허용오차 묶음"""

    tol_alg: float = 1e-9
    tol_rank: float = 1e-8
    tol_sol: float = 1e-7
    tol_flow: float = 1e-4

    def __post_init__(self):
        for name in ("tol_alg", "tol_rank", "tol_sol", "tol_flow"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"허용오차 {name} 는 양수여야 합니다: {value}")

    def as_dict(self) -> dict[str, float]:
        return {
            "tol_alg": self.tol_alg,
            "tol_rank": self.tol_rank,
            "tol_sol": self.tol_sol,
            "tol_flow": self.tol_flow,
        }


@dataclass(frozen=True)
class Settings:
    tolerances: Tolerances = field(default_factory=Tolerances)
    flow_dt: float = 1e-3
    flow_t_end: float = 1.0
    s_max: float = 10.0
    search_xatol: float = 1e-13
    search_maxiter: int = 2000
    sphere_samples: int = 1000
    theorem_flow_t_end: float = 0.2
    theorem_flow_dt: float = 1e-3
    max_workers: int = 4
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def load_config(config_path: str | None = None) -> dict:
    """
    YAML 설정 파일을 읽어 딕셔너리로 반환한다.

    파일이 없으면 경고를 남기고 빈 딕셔너리를 반환한다 (기본값 사용).
    """
    path = config_path or os.getenv("LIESOLITON_CONFIG") or DEFAULT_CONFIG_PATH

    if not os.path.exists(path):
        logger.warning(f"설정 파일을 찾을 수 없습니다, 기본값 사용: {path}")
        return {}

    with open(path, "r", encoding="utf-8") as f:
        try:
            config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"설정 파일 파싱 실패 ({path}): {e}") from e

    if not isinstance(config, dict):
        raise ConfigError(f"설정 파일 최상위는 매핑이어야 합니다: {path}")
    return config


def _as_float(section: dict, key: str, default: float) -> float:
    value = section.get(key, default)
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"설정값 {key} 가 숫자가 아닙니다: {value!r}") from e


def build_settings(config: dict) -> Settings:
    """설정 딕셔너리와 환경변수로부터 Settings 객체를 만든다."""
    tol_cfg = config.get("tolerances", {}) or {}
    flow_cfg = config.get("flow", {}) or {}
    ext_cfg = config.get("extension", {}) or {}
    two_cfg = config.get("two_step", {}) or {}
    thm_cfg = config.get("theorems", {}) or {}
    log_cfg = config.get("logging", {}) or {}

    tol_sol = _as_float(tol_cfg, "tol_sol", 1e-7)
    env_tol = os.getenv("LIESOLITON_TOL")
    if env_tol:
        try:
            tol_sol = float(env_tol)
        except ValueError as e:
            raise ConfigError(f"LIESOLITON_TOL 값이 숫자가 아닙니다: {env_tol!r}") from e
        logger.debug(f"LIESOLITON_TOL 적용: tol_sol={tol_sol}")

    tolerances = Tolerances(
        tol_alg=_as_float(tol_cfg, "tol_alg", 1e-9),
        tol_rank=_as_float(tol_cfg, "tol_rank", 1e-8),
        tol_sol=tol_sol,
        tol_flow=_as_float(tol_cfg, "tol_flow", 1e-4),
    )

    return Settings(
        tolerances=tolerances,
        flow_dt=_as_float(flow_cfg, "dt", 1e-3),
        flow_t_end=_as_float(flow_cfg, "t_end", 1.0),
        s_max=_as_float(ext_cfg, "s_max", 10.0),
        search_xatol=_as_float(ext_cfg, "search_xatol", 1e-13),
        search_maxiter=int(_as_float(ext_cfg, "search_maxiter", 2000)),
        sphere_samples=int(_as_float(two_cfg, "sphere_samples", 1000)),
        theorem_flow_t_end=_as_float(thm_cfg, "flow_t_end", 0.2),
        theorem_flow_dt=_as_float(thm_cfg, "flow_dt", 1e-3),
        max_workers=int(_as_float(thm_cfg, "max_workers", 4)),
        log_level=os.getenv("LIESOLITON_LOG_LEVEL", log_cfg.get("level", "INFO")).upper(),
        log_format=log_cfg.get("format", Settings.log_format),
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """프로세스 전역 설정 (최초 1회 로드)"""
    load_dotenv()
    return build_settings(load_config())


def default_tolerances() -> Tolerances:
    return get_settings().tolerances
