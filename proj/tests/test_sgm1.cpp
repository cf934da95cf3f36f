// SPDX-License-Identifier: Apache-2.0
//
// scar-channel: LiDAR-driven scatterer recognition and V2V channel synthesis
// Copyright (C) 2026 The scar-channel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include <catch_amalgamated.hpp>

#include "scar/error.hpp"
#include "scar/sgm1.hpp"

#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

// Covered tests:
// - Header layout and little-endian payload
// - Bit-exact round trip including special values
// - Rejection of bad magic, truncation and trailing bytes
// - Sidecar and manifest JSON round trips
// - Deterministic 3:1:1 split assignment

using namespace scar;

TEST_CASE("SGM1 - Byte layout")
{
    Sgm1 g{1, 1, 2, {1.0f, -2.5f}};
    std::ostringstream out;
    write_sgm1(out, g);
    const std::string s = out.str();
    REQUIRE(s.size() == 16 + 8);
    CHECK(s.substr(0, 4) == "SGM1");
    const unsigned char *b = reinterpret_cast<const unsigned char *>(s.data());
    CHECK((b[4] == 1 && b[5] == 0 && b[6] == 0 && b[7] == 0));
    CHECK((b[12] == 2 && b[13] == 0));
    // 1.0f = 0x3F800000 little-endian.
    CHECK((b[16] == 0x00 && b[17] == 0x00 && b[18] == 0x80 && b[19] == 0x3F));
}

TEST_CASE("SGM1 - Round trip")
{
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> u(-1e6f, 1e6f);
    Sgm1 g{3, 80, 80, {}};
    for (int i = 0; i < 3 * 80 * 80; ++i)
        g.data.push_back(u(rng));
    g.data[0] = -0.0f;
    g.data[1] = std::numeric_limits<float>::denorm_min();
    g.data[2] = std::numeric_limits<float>::infinity();

    const auto dir = std::filesystem::temp_directory_path() / "scar_test_sgm1";
    std::filesystem::create_directories(dir);
    write_sgm1(dir / "a.sgm1", g);
    CHECK_FALSE(std::filesystem::exists(dir / "a.sgm1.tmp"));
    auto back = read_sgm1(dir / "a.sgm1");
    CHECK(back.layers == 3);
    CHECK(back.rows == 80);
    CHECK(back.cols == 80);
    REQUIRE(back.data.size() == g.data.size());
    CHECK(std::memcmp(back.data.data(), g.data.data(), g.data.size() * 4) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("SGM1 - Malformed input")
{
    std::istringstream magic(std::string("SGM2") + std::string(12, '\0'));
    CHECK_THROWS_AS(read_sgm1(magic), FormatError);

    std::ostringstream out;
    write_sgm1(out, Sgm1{1, 2, 2, {1, 2, 3, 4}});
    const std::string s = out.str();
    std::istringstream trunc(s.substr(0, s.size() - 1));
    CHECK_THROWS_AS(read_sgm1(trunc), FormatError);
    std::istringstream extra(s + "x");
    CHECK_THROWS_AS(read_sgm1(extra), FormatError);
    std::istringstream header(s.substr(0, 10));
    CHECK_THROWS_AS(read_sgm1(header), FormatError);

    std::ostringstream sink;
    CHECK_THROWS_AS(write_sgm1(sink, Sgm1{1, 2, 2, {1}}), DimMismatch);
}

TEST_CASE("SGM1 - Prediction validation")
{
    auto spec = GridSpec::make({0, 30, 0, 30}, 2, 2);
    auto m = scatterer_map_from_sgm1(Sgm1{1, 2, 2, {0, 0.5f, 1, 0}}, spec);
    CHECK(m.density.at(0, 1) == 0.5);
    CHECK_THROWS_AS(scatterer_map_from_sgm1(Sgm1{1, 2, 2, {0, -0.1f, 1, 0}}, spec), NegativeDensity);
    CHECK_THROWS_AS(scatterer_map_from_sgm1(Sgm1{1, 3, 2, {0, 0, 0, 0, 0, 0}}, spec), DimMismatch);
    CHECK_THROWS_AS(scatterer_map_from_sgm1(Sgm1{1, 2, 2, {0, std::numeric_limits<float>::quiet_NaN(), 1, 0}}, spec),
                    NegativeDensity);
}

TEST_CASE("SGM1 - Sidecar and manifest")
{
    Sgm1Sidecar meta{7, {-1.5, 2.25, 0.1, 9.0}, Vec3(0.1, 0.2, 1.2), Vec3(60, -1.75, 1.2),
                     {"density", "height", "position"}};
    auto back = sidecar_from_json(sidecar_to_json(meta));
    CHECK(back.snapshot == 7);
    CHECK(back.bounds == meta.bounds);
    CHECK(back.tx == meta.tx);
    CHECK(back.rx == meta.rx);
    CHECK(back.layers == meta.layers);
    CHECK_THROWS_AS(sidecar_from_json("{}"), FormatError);

    Manifest m;
    m.vtd = "low";
    std::array<int, 3> counts{};
    for (int i = 0; i < 5000; ++i)
    {
        ManifestEntry e;
        e.id = "s" + std::to_string(i) + "_Tx-Rx";
        e.snapshot = i + 1;
        e.features = "features/" + e.id + ".sgm1";
        e.truth = "truth/" + e.id + ".sgm1";
        e.split = split_for(e.id);
        ++counts[int(e.split)];
        m.samples.push_back(e);
    }
    CHECK(counts[0] / 5000.0 == Catch::Approx(0.6).margin(0.03));
    CHECK(counts[1] / 5000.0 == Catch::Approx(0.2).margin(0.03));
    CHECK(counts[2] / 5000.0 == Catch::Approx(0.2).margin(0.03));
    const std::string text = manifest_to_json(m);
    auto m2 = manifest_from_json(text);
    REQUIRE(m2.samples.size() == m.samples.size());
    CHECK(manifest_to_json(m2) == text);
    CHECK(split_for("abc") == split_for(std::string("abc")));
}
