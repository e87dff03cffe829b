#include <doctest.h>

#include "properties.hpp"

using namespace vilmap::testutil;

TEST_CASE("library invariant suite") {
    const auto results = run_property_suite();
    CHECK(!results.empty());
    for (const PropResult& r : results) {
        INFO(r.name, " ", r.detail);
        CHECK(r.ok);
    }
}
