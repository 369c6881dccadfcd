#pragma once

// Everything except the command-line front end (outcomes/cli.hpp, which needs CLI11).

#include "outcomes/advantage.hpp"
#include "outcomes/catalog.hpp"
#include "outcomes/conic.hpp"
#include "outcomes/discrimination.hpp"
#include "outcomes/errors.hpp"
#include "outcomes/generalized.hpp"
#include "outcomes/io.hpp"
#include "outcomes/quantum.hpp"
#include "outcomes/relabeling.hpp"
#include "outcomes/robustness.hpp"
