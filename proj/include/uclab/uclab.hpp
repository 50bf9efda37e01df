#pragma once

#include "uclab/numeric.hpp"
#include "uclab/scalar.hpp"
#include "uclab/set_dist.hpp"
#include "uclab/families.hpp"
#include "uclab/measure.hpp"
#include "uclab/transport.hpp"
#include "uclab/coupling.hpp"
#include "uclab/counterexample.hpp"
#include "uclab/report.hpp"
