"""Published reference values used by ``reproduce`` and the acceptance tests."""

from __future__ import annotations

import math

# t -> exact left Caputo derivative of t^4 with order t^2/2, from the closed power formula
TABLE_A1 = {
    0.1: 1.019223177296953e-04,
    0.2: 0.001702793965464,
    0.3: 0.009148530806348,
    0.4: 0.031052290994593,
    0.5: 0.082132144921157,
    0.6: 0.185651036003120,
    0.7: 0.376408251363662,
    0.8: 0.704111480975332,
    0.9: 1.236753486749357,
}
TABLE_A1_TOL = 1e-6

# four-decimal point values printed for the worked operator examples
POINT_TOL = 5e-4
FI_LEFT = 0.2661
FI_RIGHT = 0.4619
CAPUTO_T4_LEFT = 0.1857
CAPUTO_T4_RIGHT = -1.0385
CAPUTO_EXP_LEFT = 0.9917
CAPUTO_EXP_RIGHT = -1.1398
COMBINED = 0.7144

# variational examples
FUNDAMENTAL_VALUE = -2.0 / 3.0
HIGHER_ORDER_VALUE = -0.5
DELAY_VALUE = -2.0  # int_0^2 (-t - 2) dt + T^2 along the optimum
VALUE_TOL = 1e-4
HERGLOTZ1_T = 1.67835
HERGLOTZ1_T_TOL = 1e-4
HERGLOTZ1_Z = -1.81685
HERGLOTZ1_Z_TOL = 1e-3
HERGLOTZ3_Z1 = -2.0 / 3.0
HERGLOTZ3_TOL = 1e-6
# with x = 0 the Herglotz ODE z' = (t - 1)(z^2 + 1) integrates to tan(t^2/2 - t)
HERGLOTZ2_Z1 = math.tan(-0.5)
HERGLOTZ2_TOL = 1e-5
RESIDUAL_TOL = 1e-4

PDE_TOL = 5e-2
