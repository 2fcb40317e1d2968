#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gl2/subgroup.hpp"

namespace gl2 {

// Group file: one record per line, `label <N> r1;r2;r3;r4;...` where
// consecutive row pairs "a,b" ";" "c,d" form the generator matrices.
std::vector<Subgroup> parse_group_file(const std::string& path);
std::vector<Subgroup> parse_group_lines(const std::string& text, const std::string& origin);
std::string group_record(const Subgroup& g);
void write_group_file(const std::string& path, const std::vector<Subgroup>& groups,
                      const std::string& header = "");

struct CurveFixture {
    std::string label;
    std::int64_t a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;
    unsigned isogeny_degree = 0;
    std::uint64_t claimed_index = 0;
};

// Fixture file: `label a1 a2 a3 a4 a6 p claimed_index` per line.
std::vector<CurveFixture> parse_fixture_file(const std::string& path);

// FNV-1a digest of a file's bytes, for report embedding.
std::uint64_t file_digest(const std::string& path);

std::string data_path(const std::string& relative);

}  // namespace gl2
