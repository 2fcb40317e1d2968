#include "gl2/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gl2 {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<Subgroup> parse_group_lines(const std::string& text, const std::string& origin) {
    std::vector<Subgroup> out;
    std::set<std::string> labels;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto where = origin + ":" + std::to_string(lineno);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string label, mats;
        std::uint64_t n = 0;
        if (!(is >> label >> n))
            throw std::runtime_error(where + ": malformed group record");
        if (n == 0 || n > 0xffff)
            throw std::runtime_error(where + ": modulus out of range");
        if (!labels.insert(label).second)
            throw std::runtime_error(where + ": duplicate label " + label);
        std::vector<Mat2> gens;
        if (is >> mats) {
            auto rows = split(mats, ';');
            if (rows.size() % 2 != 0)
                throw std::runtime_error(where + ": odd number of matrix rows");
            for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
                auto top = split(rows[i], ',');
                auto bot = split(rows[i + 1], ',');
                if (top.size() != 2 || bot.size() != 2)
                    throw std::runtime_error(where + ": malformed matrix row");
                Mat2 m;
                try {
                    m = Mat2(residue_t(n), std::stoll(top[0]), std::stoll(top[1]), std::stoll(bot[0]),
                             std::stoll(bot[1]));
                } catch (const std::exception&) {
                    throw std::runtime_error(where + ": malformed matrix entries");
                }
                if (!m.invertible())
                    throw std::runtime_error(where + ": generator " + m.str() + " not invertible mod " +
                                             std::to_string(n));
                gens.push_back(m);
            }
        }
        out.push_back(Subgroup(residue_t(n), std::move(gens), label));
    }
    return out;
}

std::vector<Subgroup> parse_group_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open group file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_group_lines(ss.str(), path);
}

std::string group_record(const Subgroup& g) {
    std::ostringstream os;
    os << (g.label().empty() ? "g" : g.label()) << " " << g.modulus();
    if (!g.generators().empty()) {
        os << " ";
        bool first = true;
        for (auto& m : g.generators()) {
            if (!first) os << ";";
            os << m.str();
            first = false;
        }
    }
    return os.str();
}

void write_group_file(const std::string& path, const std::vector<Subgroup>& groups,
                      const std::string& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write group file " + path);
    if (!header.empty()) {
        std::istringstream hs(header);
        std::string hline;
        while (std::getline(hs, hline)) out << "# " << hline << "\n";
    }
    for (auto& g : groups) out << group_record(g) << "\n";
}

std::vector<CurveFixture> parse_fixture_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file " + path);
    std::vector<CurveFixture> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        CurveFixture f;
        if (!(is >> f.label >> f.a1 >> f.a2 >> f.a3 >> f.a4 >> f.a6 >> f.isogeny_degree >>
              f.claimed_index))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed fixture row");
        out.push_back(f);
    }
    return out;
}

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string data_path(const std::string& relative) {
    return std::string(GL2_DATA_DIR) + "/" + relative;
}

}  // namespace gl2
