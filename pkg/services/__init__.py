# services 패키지 초기화
# - lie_core: 구조상수, Jacobi, 하강 중심열, 미분 대수
# - metric_geometry: Levi-Civita 접속, 곡률, 발산, Lie 미분
# - soliton_solver: nilsoliton / 좌불변 벡터장 soliton 판정, Milnor 틀
# - two_step: 2-step 멱영 분해, 비특이성, 가해 확장
# - flow_sim: 동차 Ricci 흐름 적분과 진화 법칙 검증
# - catalog, spec_file: 표준 대수 카탈로그, 명세 파일 / 궤적 CSV
