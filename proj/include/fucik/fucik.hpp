#ifndef FUCIK_FUCIK_HPP
#define FUCIK_FUCIK_HPP

#include "fucik/errors.hpp"
#include "fucik/quadrature.hpp"
#include "fucik/domain_kernel.hpp"
#include "fucik/assembly.hpp"
#include "fucik/spectrum.hpp"
#include "fucik/sphere.hpp"
#include "fucik/functional.hpp"
#include "fucik/path_deformation.hpp"
#include "fucik/fucik_continuation.hpp"
#include "fucik/fucik_minimax.hpp"
#include "fucik/nonresonance.hpp"
#include "fucik/validation.hpp"

#endif
