#include "spinnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spinnet {

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void CsvTable::add_row(std::vector<CsvCell> row)
{
    if (row.size() != header_.size())
        throw std::invalid_argument("csv: row width differs from header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i)
        os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i)
                os << ',';
            if (const double* d = std::get_if<double>(&r[i]))
                os << format_double(*d);
            else if (const long long* n = std::get_if<long long>(&r[i]))
                os << *n;
            else
                os << std::get<std::string>(r[i]);
        }
        os << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::string& path) const
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << str();
}

const std::vector<double>& CsvData::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return columns[i];
    throw std::out_of_range("csv: no column named " + name);
}

CsvData read_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read " + path);
    CsvData d;
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("csv: empty file " + path);
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');)
        d.header.push_back(h);
    d.columns.resize(d.header.size());
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::stringstream ls(line);
        std::size_t i = 0;
        for (std::string cell; std::getline(ls, cell, ','); ++i) {
            if (i >= d.columns.size())
                throw std::runtime_error("csv: ragged row in " + path);
            d.columns[i].push_back(std::strtod(cell.c_str(), nullptr));
        }
        if (i != d.columns.size())
            throw std::runtime_error("csv: ragged row in " + path);
    }
    return d;
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(f);
}

} // namespace spinnet
