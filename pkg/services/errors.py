"""
liesoliton 예외 계층

CLI 종료 코드 규약:
    0 정상, 1 정리(theorem) 검증 실패, 2 입력 검증 실패,
    3 흐름(flow) 붕괴, 4 전제 조건 위반
"""


class LieSolitonError(Exception):
    """모든 liesoliton 예외의 기반 클래스"""

    exit_code = 1


class ValidationError(LieSolitonError, ValueError):
    """
    입력 검증 실패 (반대칭성, Jacobi 항등식, 비양정치 계량, 파일 형식 등)

    Args:
        message: 오류 메시지
        index: 문제가 된 성분의 인덱스 (있을 경우)
    """

    exit_code = 2

    def __init__(self, message: str, index: tuple | None = None):
        super().__init__(message)
        self.index = index


class PreconditionError(LieSolitonError, ValueError):
    """연산의 전제 조건 위반 (예: 멱영이 아닌 대수에 nilsoliton 방정식 적용)"""

    exit_code = 4


class CatalogError(LieSolitonError, KeyError):
    """카탈로그에 없는 이름"""

    exit_code = 2

    def __init__(self, name: str, valid_names: list[str]):
        self.name = name
        self.valid_names = list(valid_names)
        super().__init__(
            f"unknown algebra '{name}'; valid names: {', '.join(self.valid_names)}"
        )

    def __str__(self) -> str:
        # KeyError 는 메시지를 repr 로 감싸므로 재정의
        return self.args[0]


class FlowBreakdownError(LieSolitonError):
    """Ricci 흐름 적분 중 계량이 양정치성을 잃음 (CLI 에서만 발생)"""

    exit_code = 3

    def __init__(self, t_star: float):
        self.t_star = t_star
        super().__init__(f"curvature blow-up reached at t*={t_star:.17g}")


class ConfigError(LieSolitonError):
    """설정 파일 또는 환경변수 값이 잘못됨"""

    exit_code = 2


class InconsistencyError(LieSolitonError):
    """서로 독립적인 두 계산 경로의 결과가 일치하지 않음"""

    exit_code = 1
