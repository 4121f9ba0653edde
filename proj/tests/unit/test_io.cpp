#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "adams/io.hpp"

using namespace adams;

TEST_CASE("doubles round-trip exactly") {
    for (double v : {0.1, 1.0 / 3.0, 6e-4, -2.5e-300, 1e308, 0.0}) CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(std::isnan(parse_double("nan")));
    CHECK_THROWS(parse_double("1.0x"));
}

TEST_CASE("csv round-trip") {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{"1", "x"}, {"2.5", "y"}};
    auto back = CsvTable::parse(t.to_string());
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column("b") == 1);
    CHECK_THROWS(back.column("c"));
}

TEST_CASE("atomic write then read") {
    auto p = std::filesystem::temp_directory_path() / "adams_io_test" / "f.txt";
    write_file_atomic(p, "hello\n");
    CHECK(read_file(p) == "hello\n");
    std::filesystem::remove_all(p.parent_path());
}
