#pragma once

// Umbrella header for the library. The CLI layer (cli.hpp) is not included
// here; pull it in explicitly if you want the subcommand runner.

#include "corpus.hpp"
#include "phi.hpp"
#include "ranking.hpp"
#include "sampling.hpp"
#include "stats.hpp"
