#include "qrec/errors.hpp"
#include "qrec/harness.hpp"

#include <fstream>
#include <sstream>

namespace qrec {

using nlohmann::json;

json to_json(const ResultSet& rs) {
    json plot = json::array();
    for (const auto& [x, y] : rs.plot) plot.push_back({x, y});
    return {{"config", rs.config},
            {"summary", rs.summary},
            {"columns", rs.columns},
            {"rows", rs.rows},
            {"plot", {{"x", rs.plot_x}, {"y", rs.plot_y}, {"points", plot}}},
            {"table", {{"header", rs.table_header}, {"rows", rs.table}}},
            {"provenance", rs.provenance}};
}

ResultSet result_set_from_json(const json& j) {
    try {
        ResultSet rs;
        rs.config = j.at("config");
        rs.summary = j.at("summary");
        rs.columns = j.at("columns").get<std::vector<std::string>>();
        rs.rows = j.at("rows").get<std::vector<std::vector<json>>>();
        rs.plot_x = j.at("plot").at("x").get<std::string>();
        rs.plot_y = j.at("plot").at("y").get<std::string>();
        for (const auto& p : j.at("plot").at("points")) rs.plot.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        rs.table_header = j.at("table").at("header").get<std::vector<std::string>>();
        rs.table = j.at("table").at("rows").get<std::vector<std::vector<std::string>>>();
        rs.provenance = j.at("provenance");
        return rs;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed result file: ") + e.what());
    }
}

namespace {

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (!v.is_string()) return v.dump();
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string text_table(const ResultSet& rs) {
    std::vector<std::size_t> width(rs.table_header.size(), 0);
    auto grow = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].size());
    };
    grow(rs.table_header);
    for (const auto& r : rs.table) grow(r);
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < width.size(); ++i) {
            const std::string cell = i < row.size() ? row[i] : "";
            os << (i ? "  " : "") << cell << std::string(width[i] - cell.size(), ' ');
        }
        os << '\n';
    };
    os << "# " << rs.provenance.value("experiment", std::string("experiment")) << "  seed "
       << rs.provenance.value("seed", std::uint64_t{0}) << '\n';
    line(rs.table_header);
    std::vector<std::string> rule;
    for (std::size_t w : width) rule.emplace_back(w, '-');
    line(rule);
    for (const auto& r : rs.table) line(r);
    return os.str();
}

}  // namespace

std::string render(const ResultSet& rs, const std::string& format) {
    std::ostringstream os;
    if (format == "csv") {
        for (std::size_t i = 0; i < rs.columns.size(); ++i) os << (i ? "," : "") << rs.columns[i];
        os << '\n';
        for (const auto& row : rs.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
            os << '\n';
        }
        return os.str();
    }
    if (format == "json") return to_json(rs).dump(2) + "\n";
    if (format == "txt") return text_table(rs);
    if (format == "plot") {
        os << "# " << rs.plot_x << '\t' << rs.plot_y << '\n';
        os.precision(17);
        for (const auto& [x, y] : rs.plot) os << x << '\t' << y << '\n';
        return os.str();
    }
    throw InvalidArgument("unknown report format '" + format + "'");
}

std::filesystem::path emit_report(const ResultSet& rs, const std::string& format, const std::filesystem::path& dir) {
    const std::string body = render(rs, format);
    static const std::map<std::string, std::string> names{
        {"csv", "results.csv"}, {"json", "results.json"}, {"txt", "results.txt"}, {"plot", "trace.dat"}};
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / names.at(format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    out << body;
    out.close();
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    return path;
}

}  // namespace qrec
