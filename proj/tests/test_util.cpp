#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "cra/digest.hpp"
#include "cra/format.hpp"
#include "cra/rng.hpp"
#include "cra/stats.hpp"
#include "json.hpp"

using namespace cra;

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("fnv1a64 chains across calls") {
    std::string foo = "foo", bar = "bar";
    std::uint64_t h = fnv1a64(foo.data(), foo.size());
    h = fnv1a64(bar.data(), bar.size(), h);
    CHECK(h == fnv1a64("foobar"));
    // embedded NUL bytes are part of the stream
    const char raw[] = {'a', '\0', 'b'};
    CHECK(fnv1a64(raw, 3) != fnv1a64("ab"));
}

TEST_CASE("digest_hex is fixed-width lowercase") {
    CHECK(digest_hex(0x1ull) == "0000000000000001");
    CHECK(digest_hex(0xcbf29ce484222325ull) == "cbf29ce484222325");
    CHECK(digest_hex(0xFFFFFFFFFFFFFFFFull) == "ffffffffffffffff");
}

TEST_CASE("file digest equals in-memory digest") {
    std::string path = "/tmp/cra_test_digest_" + std::to_string(::getpid()) + ".bin";
    std::string payload = "header\n";
    payload.push_back('\0');
    payload += "tail";
    {
        std::ofstream out(path, std::ios::binary);
        out.write(payload.data(), std::streamsize(payload.size()));
    }
    CHECK(fnv1a64_file(path) == fnv1a64(payload.data(), payload.size()));
    std::remove(path.c_str());
    CHECK_THROWS_AS(fnv1a64_file("/nonexistent/definitely/missing"), std::runtime_error);
}

TEST_CASE("fmt17 round-trips doubles exactly") {
    std::vector<double> cases = {0.0,
                                 1.0,
                                 -1.0,
                                 0.1,
                                 1.0 / 3.0,
                                 1e300,
                                 -1e300,
                                 5e-324,
                                 2.2250738585072014e-308,
                                 0.25067585001474091,
                                 123456789.123456789};
    Rng rng(41);
    for (int k = 0; k < 500; ++k) cases.push_back((rng.uniform() - 0.5) * std::exp2(40.0 * (rng.uniform() - 0.5)));
    for (double v : cases) {
        std::string s = fmt17(v);
        double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == v);
    }
    CHECK(std::signbit(std::strtod(fmt17(-0.0).c_str(), nullptr)));
}

TEST_CASE("json writer produces the exact canonical layout") {
    JsonWriter w;
    w.begin_object()
        .key("a")
        .value(1)
        .key("b")
        .begin_array()
        .value(1.5)
        .value("x")
        .value(true)
        .value_null()
        .end_array()
        .key("c")
        .begin_object()
        .key("d")
        .value("e\ntab\t\"q\"")
        .end_object()
        .end_object();
    std::string expect = R"({
  "a": 1,
  "b": [
    1.5,
    "x",
    true,
    null
  ],
  "c": {
    "d": "e\ntab\t\"q\""
  }
})";
    expect += "\n";
    CHECK(w.str() == expect);

    // and the canonical layout is real JSON
    auto parsed = nlohmann::json::parse(w.str());
    CHECK(parsed["a"] == 1);
    CHECK(parsed["b"].size() == 4);
    CHECK(parsed["b"][3].is_null());
    CHECK(parsed["c"]["d"] == "e\ntab\t\"q\"");
}

TEST_CASE("json writer serializes doubles with fmt17 and nulls non-finite") {
    JsonWriter w;
    w.begin_array()
        .value(0.1)
        .value(std::nan(""))
        .value(std::numeric_limits<double>::infinity())
        .end_array();
    auto parsed = nlohmann::json::parse(w.str());
    CHECK(parsed[0].get<double>() == 0.1);
    CHECK(parsed[1].is_null());
    CHECK(parsed[2].is_null());
}

TEST_CASE("json writer rejects structural misuse") {
    {
        JsonWriter w;
        CHECK_THROWS_AS(w.end_object(), std::logic_error);
    }
    {
        JsonWriter w;
        w.begin_array();
        CHECK_THROWS_AS(w.key("k"), std::logic_error);
    }
    {
        JsonWriter w;
        w.begin_object();
        CHECK_THROWS_AS(w.end_array(), std::logic_error);
    }
    {
        JsonWriter w;
        w.begin_object();
        CHECK_THROWS_AS(w.str(), std::logic_error);
    }
}

TEST_CASE("json escaping covers control characters") {
    CHECK(json_escape("plain") == "plain");
    CHECK(json_escape("a\"b") == "a\\\"b");
    CHECK(json_escape("a\\b") == "a\\\\b");
    CHECK(json_escape(std::string(1, '\x01')) == "\\u0001");
}

TEST_CASE("upper regularized gamma reference identities") {
    // Q(1, x) = exp(-x)
    for (double x : {0.1, 0.5, 1.0, 2.5, 10.0})
        CHECK(std::abs(regularized_gamma_q(1.0, x) - std::exp(-x)) <= 1e-13);
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.04, 0.25, 1.0, 4.0, 9.0})
        CHECK(std::abs(regularized_gamma_q(0.5, x) - std::erfc(std::sqrt(x))) <= 1e-12);
    // integer a: Q(a, x) = exp(-x) * sum_{k<a} x^k / k!
    double x = 10.0;
    double term = 1.0, acc = 0.0;
    for (int k = 0; k < 5; ++k) {
        acc += term;
        term *= x / (k + 1);
    }
    CHECK(std::abs(regularized_gamma_q(5.0, x) - std::exp(-x) * acc) <= 1e-13);

    CHECK(regularized_gamma_q(2.0, 0.0) == 1.0);
    CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(regularized_gamma_q(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(regularized_gamma_q(1.0, -0.5), std::domain_error);
}

TEST_CASE("chi-square survival function") {
    for (double s : {0.5, 2.0, 7.0})
        CHECK(std::abs(chi_square_sf(s, 2) - std::exp(-0.5 * s)) <= 1e-13);
    for (double s : {0.5, 2.0, 7.0})
        CHECK(std::abs(chi_square_sf(s, 1) - std::erfc(std::sqrt(0.5 * s))) <= 1e-12);
    CHECK(chi_square_sf(0.0, 3) == 1.0);
    CHECK(chi_square_sf(-4.0, 3) == 1.0);
    CHECK_THROWS_AS(chi_square_sf(1.0, 0), std::domain_error);
    // survival decreases in the statistic
    CHECK(chi_square_sf(1.0, 5) > chi_square_sf(2.0, 5));
}

TEST_CASE("ordinary least squares recovers an exact line") {
    std::vector<double> xs = {-2.0, -1.0, 0.0, 1.0, 2.0, 5.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 * x - 2.0);
    LinearFit f = linear_fit(xs, ys);
    CHECK(std::abs(f.slope - 3.0) <= 1e-12);
    CHECK(std::abs(f.intercept + 2.0) <= 1e-12);

    CHECK_THROWS_AS(linear_fit({1.0}, {2.0}), std::domain_error);
    CHECK_THROWS_AS(linear_fit({1.0, 2.0}, {2.0}), std::domain_error);
    CHECK_THROWS_AS(linear_fit({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), std::domain_error);
}

TEST_CASE("splitmix64 and seed derivation are stable and decorrelated") {
    CHECK(splitmix64(0) == splitmix64(0));
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    // neighbouring indices differ in many bits
    std::uint64_t d = derive_seed(7, 10) ^ derive_seed(7, 11);
    int bits = 0;
    for (; d; d >>= 1) bits += int(d & 1);
    CHECK(bits >= 16);
}

TEST_CASE("rng uniform stays in the half-open unit interval") {
    Rng rng(9001);
    double lo = 1.0, hi = 0.0, acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        acc += u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(acc / n - 0.5) <= 0.005);
    // identical seeds replay identical streams
    Rng a(77), b(77);
    for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());
}
