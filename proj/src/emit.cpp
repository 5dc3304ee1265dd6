#include "rotor/emit.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "rotor/errors.hpp"

namespace rotor::app {

namespace {

std::string csv_field(const Cell& c)
{
    struct Visitor {
        std::string operator()(double x) const { return format_double(x); }
        std::string operator()(long long x) const { return std::to_string(x); }
        std::string operator()(bool x) const { return x ? "true" : "false"; }
        std::string operator()(const std::string& s) const
        {
            if (s.find_first_of(",\"\n\r") == std::string::npos)
                return s;
            std::string quoted = "\"";
            for (char ch : s) {
                if (ch == '"')
                    quoted += '"';
                quoted += ch;
            }
            return quoted + '"';
        }
    };
    return std::visit(Visitor{}, c);
}

nlohmann::ordered_json to_json(const Cell& c)
{
    struct Visitor {
        nlohmann::ordered_json operator()(double x) const
        {
            if (!std::isfinite(x))
                return nullptr;
            return x;
        }
        nlohmann::ordered_json operator()(long long x) const { return x; }
        nlohmann::ordered_json operator()(bool x) const { return x; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    };
    return std::visit(Visitor{}, c);
}

// nlohmann prints the shortest round-trip form; floats are re-rendered here
// with a fixed 17 significant digits.
void write_json(const nlohmann::ordered_json& j, std::string& out, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first)
                out += ",\n";
            first = false;
            out += inner + nlohmann::json(key).dump() + ": ";
            write_json(value, out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool scalars = std::none_of(j.begin(), j.end(), [](const auto& v) { return v.is_structured(); });
        if (scalars) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out += ", ";
                write_json(j[i], out, indent + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                out += ",\n";
            out += inner;
            write_json(j[i], out, indent + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? format_double(x) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

} // namespace

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    std::string s = fmt::format("{:.17g}", x);
    // Keep floats recognisable as floats in JSON.
    if (s.find_first_of(".eE") == std::string::npos)
        s += ".0";
    return s;
}

std::string render_csv(const Result& result)
{
    std::string out;
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        if (i)
            out += ',';
        out += csv_field(result.columns[i]);
    }
    out += '\n';
    auto write_row = [&](const std::vector<Cell>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += csv_field(row[i]);
        }
        out += '\n';
    };
    for (const auto& row : result.rows)
        write_row(row);
    for (const auto& [name, values] : result.footers) {
        std::vector<Cell> row{name};
        row.insert(row.end(), values.begin(), values.end());
        write_row(row);
    }
    return out;
}

std::string render_json(const Result& result, const nlohmann::ordered_json& meta)
{
    nlohmann::ordered_json doc;
    doc["meta"] = meta;
    doc["data"] = nlohmann::ordered_json::array();
    for (const auto& row : result.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size() && i < result.columns.size(); ++i)
            obj[result.columns[i]] = to_json(row[i]);
        doc["data"].push_back(std::move(obj));
    }
    doc["extras"] = nlohmann::ordered_json::object();
    for (const auto& [name, values] : result.footers) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& v : values)
            arr.push_back(to_json(v));
        doc["extras"][name] = std::move(arr);
    }
    std::string out;
    write_json(doc, out, 0);
    out += '\n';
    return out;
}

std::string render(const Result& result, Format format, const nlohmann::ordered_json& meta)
{
    return format == Format::Csv ? render_csv(result) : render_json(result, meta);
}

void emit(const Result& result, Format format, const nlohmann::ordered_json& meta, const std::filesystem::path& path)
{
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot open " + path.string() + " for writing");
    const std::string text = render(result, format, meta);
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    file.close();
    if (!file)
        throw IoError("failed writing " + path.string());
}

} // namespace rotor::app
