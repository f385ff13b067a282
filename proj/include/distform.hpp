#ifndef DISTFORM_HPP_
#define DISTFORM_HPP_

#include "distform/error.hpp"
#include "distform/graph.hpp"
#include "distform/rigidity.hpp"
#include "distform/potential.hpp"
#include "distform/dither.hpp"
#include "distform/sinusoids.hpp"
#include "distform/dynamics.hpp"
#include "distform/averaging.hpp"
#include "distform/esc.hpp"
#include "distform/scenario.hpp"
#include "distform/run.hpp"
#include "distform/io.hpp"

#endif // DISTFORM_HPP_
