#include "fbarcirc/bvd.hpp"
#include "fbarcirc/errors.hpp"

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

namespace fbarcirc {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::vector<AdmittanceSample> read_admittance_csv(std::istream& in) {
    std::vector<AdmittanceSample> out;
    std::string line;
    int lineno = 0;
    bool seen_row = false;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            fields.push_back(body.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }

        std::vector<double> values;
        bool numeric = true;
        for (auto f : fields) {
            auto v = to_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            if (!seen_row && out.empty()) {
                seen_row = true;  // header
                continue;
            }
            throw ParseError("line " + std::to_string(lineno) + ": non-numeric field");
        }
        seen_row = true;
        if (values.size() != 2 && values.size() != 3) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 2 or 3 columns, got " +
                             std::to_string(values.size()));
        }
        if (columns == 0) columns = values.size();
        if (values.size() != columns) {
            throw ParseError("line " + std::to_string(lineno) + ": column count changed");
        }
        out.push_back({values[0], Complex(values[1], columns == 3 ? values[2] : 0.0)});
    }
    if (out.empty()) throw ParseError("no admittance samples (" + std::to_string(lineno) + " lines read)");
    return out;
}

}  // namespace fbarcirc
