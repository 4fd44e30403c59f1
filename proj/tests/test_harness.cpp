#include <doctest.h>
TEST_CASE("tmp"){CHECK(true);}
