#include <catch2/catch_amalgamated.hpp>
#include "ocuflow/newton.hpp"
