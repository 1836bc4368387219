// Copyright 2026 The csmala Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "csmala/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csmala/rng.hpp"
#include "json.hpp"

namespace csmala {

double true_f(double x) {
    if (x < 0.0) return 1.5 * (x + 0.5) * (x + 0.5);
    return 0.3 * std::sin(10.0 * x - 2.0) + 0.5;
}

Dataset generate(long n, double noise_sd, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
    if (noise_sd < 0.0) throw std::invalid_argument("generate: noise_sd must be >= 0");
    RngStream rng(derive_seed(seed, 0, substream::kData));
    Dataset data;
    data.xs.resize(1, n);
    data.ys.resize(n);
    data.seed = seed;
    data.noise_sd = noise_sd;
    for (long i = 0; i < n; ++i) {
        // Fair sign bit, then uniform on [0.2, 0.8]: exact equal mass on
        // the two intervals without rejection.
        const bool negative = rng.next_u64() & 1;
        double x = 0.2 + 0.6 * rng.uniform();
        if (negative) x = -x;
        const double noise = noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0;
        data.xs(0, i) = x;
        data.ys[i] = true_f(x) + noise;
    }
    return data;
}

namespace {

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

void save(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x,y\n";
    for (long i = 0; i < data.n(); ++i)
        out << format_double(data.xs(0, i)) << ',' << format_double(data.ys[i]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);

    nlohmann::json meta;
    meta["n"] = data.n();
    meta["seed"] = data.seed;
    meta["noise_sd"] = data.noise_sd;
    meta["generator"] = data.generator;
    std::ofstream side(path + ".json");
    if (!side) throw std::runtime_error("cannot open for writing: " + path + ".json");
    side << meta.dump(2) << '\n';
}

Dataset load(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) throw std::runtime_error("cannot open for reading: " + path + ".json");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception&) {
        throw SchemaError("dataset sidecar: malformed JSON: " + path + ".json");
    }
    if (!meta.contains("n") || !meta.contains("seed") || !meta.contains("noise_sd"))
        throw SchemaError("dataset sidecar: missing fields: " + path + ".json");

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "x,y")
        throw SchemaError("dataset csv: bad header: " + path);

    const long n = meta["n"].get<long>();
    Dataset data;
    data.xs.resize(1, n);
    data.ys.resize(n);
    data.seed = meta["seed"].get<std::uint64_t>();
    data.noise_sd = meta["noise_sd"].get<double>();
    data.generator = meta.value("generator", std::string("sect5-piecewise"));
    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw SchemaError("dataset csv: truncated file: " + path);
        std::istringstream row(line);
        char comma = 0;
        if (!(row >> data.xs(0, i) >> comma >> data.ys[i]) || comma != ',')
            throw SchemaError("dataset csv: malformed row: " + path);
    }
    return data;
}

}  // namespace csmala
