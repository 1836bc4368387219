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

#include "csmala/sampler.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "csmala/data.hpp"

namespace csmala {

std::string algo_name(Algo algo) {
    switch (algo) {
        case Algo::MALA: return "mala";
        case Algo::SMALA: return "smala";
        case Algo::CSMALA: return "csmala";
    }
    return "unknown";
}

Algo algo_from_name(const std::string& name) {
    if (name == "mala") return Algo::MALA;
    if (name == "smala") return Algo::SMALA;
    if (name == "csmala") return Algo::CSMALA;
    throw std::invalid_argument("unknown algorithm: " + name);
}

void write_trace_csv(const std::vector<StepDiagnostics>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "step,accepted,log_alpha,mask_count,risk_value,restarted\n";
    char buffer[128];
    for (const StepDiagnostics& diag : trace) {
        std::snprintf(buffer, sizeof(buffer), "%ld,%d,%.17g,%ld,%.17g,%d\n", diag.step,
                      diag.accepted ? 1 : 0, diag.log_alpha, diag.mask_count,
                      diag.risk_value, diag.restarted ? 1 : 0);
        out << buffer;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<StepDiagnostics> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "step,accepted,log_alpha,mask_count,risk_value,restarted")
        throw SchemaError("trace csv: bad header: " + path);
    std::vector<StepDiagnostics> trace;
    while (std::getline(in, line)) {
        // strtod-based parsing so "-inf" log-alphas round-trip.
        std::array<std::string, 6> fields;
        std::size_t start = 0;
        for (int f = 0; f < 6; ++f) {
            const std::size_t end = line.find(',', start);
            if ((end == std::string::npos) != (f == 5))
                throw SchemaError("trace csv: malformed row: " + path);
            fields[f] = line.substr(start, end - start);
            start = end + 1;
        }
        StepDiagnostics diag;
        diag.step = std::strtol(fields[0].c_str(), nullptr, 10);
        diag.accepted = fields[1] == "1";
        diag.log_alpha = std::strtod(fields[2].c_str(), nullptr);
        diag.mask_count = std::strtol(fields[3].c_str(), nullptr, 10);
        diag.risk_value = std::strtod(fields[4].c_str(), nullptr);
        diag.restarted = fields[5] == "1";
        trace.push_back(diag);
    }
    return trace;
}

}  // namespace csmala
