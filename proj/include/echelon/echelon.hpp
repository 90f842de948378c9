#ifndef ECHELON_ECHELON_HPP
#define ECHELON_ECHELON_HPP

#include "echelon/rng.hpp"
#include "echelon/demand.hpp"
#include "echelon/quadrature.hpp"
#include "echelon/costs.hpp"
#include "echelon/dynamics.hpp"
#include "echelon/oco.hpp"
#include "echelon/trace.hpp"
#include "echelon/centralized.hpp"
#include "echelon/decentralized.hpp"
#include "echelon/harness.hpp"

#endif // ECHELON_ECHELON_HPP
