"""Dormand-Prince 5(4) tableau and step-control constants shared by both kernels."""

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th- and embedded 4th-order weights
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
# PI controller exponents (Gustafsson); BETA = 0 recovers the elementary controller
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA
MIN_STEP_REL = 1e-14
MAX_STEPS = 50_000_000
