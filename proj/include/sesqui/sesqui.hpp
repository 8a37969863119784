#pragma once

// Numerical core. JSON/CSV output and the experiment runner live in
// sesqui/io.hpp and sesqui/lab.hpp, which additionally need json.hpp.

#include "sesqui/ball.hpp"
#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/families.hpp"
#include "sesqui/field.hpp"
#include "sesqui/grid.hpp"
#include "sesqui/monotonicity.hpp"
#include "sesqui/morrey.hpp"
#include "sesqui/noether.hpp"
#include "sesqui/operators.hpp"
#include "sesqui/solver.hpp"
#include "sesqui/stress.hpp"
#include "sesqui/version.hpp"
