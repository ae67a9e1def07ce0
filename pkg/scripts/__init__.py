# scripts 패키지 초기화
# - analyzer: 대수 하나의 종합 분석
# - report_generator: text / csv 보고서 출력
# - theorem_suite: 카탈로그 정리 검증
