#include <catch2/catch_amalgamated.hpp>
#include "ocuflow/scenario.hpp"
