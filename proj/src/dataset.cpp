#include "spomix/dataset.hpp"

#include "spomix/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace spomix {

namespace {

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

double parse_double(std::string_view cell, std::size_t row, std::size_t col) {
    double out = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        std::ostringstream msg;
        msg << "unparseable cell at data row " << row << ", column " << col << ": '" << cell << "'";
        throw IoError(msg.str());
    }
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

Dataset take_rows(const Dataset& d, const std::vector<Index>& rows) {
    Dataset out;
    out.z.resize(static_cast<Index>(rows.size()), d.d_z());
    out.x.resize(static_cast<Index>(rows.size()), d.d_x());
    out.t.resize(static_cast<Index>(rows.size()));
    out.y.resize(static_cast<Index>(rows.size()));
    if (d.u) out.u.emplace(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index r = rows[i];
        const Index w = static_cast<Index>(i);
        out.z.row(w) = d.z.row(r);
        out.x.row(w) = d.x.row(r);
        out.t[w] = d.t[r];
        out.y[w] = d.y[r];
        if (d.u) (*out.u)[w] = (*d.u)[r];
    }
    return out;
}

} // namespace

std::vector<std::string> validate_dataset(const Dataset& d) {
    std::vector<std::string> violations;
    const Index n = d.n();
    auto note = [&](const std::string& s) { violations.push_back(s); };

    if (d.z.rows() != n) note("z has " + std::to_string(d.z.rows()) + " rows, expected " + std::to_string(n));
    if (d.x.rows() != n) note("x has " + std::to_string(d.x.rows()) + " rows, expected " + std::to_string(n));
    if (d.y.size() != n) note("y has " + std::to_string(d.y.size()) + " rows, expected " + std::to_string(n));
    if (d.u && d.u->size() != n) {
        note("u has " + std::to_string(d.u->size()) + " rows, expected " + std::to_string(n));
    }

    for (Index i = 0; i < n; ++i) {
        if (d.t[i] != 0 && d.t[i] != 1) note("t not binary at row " + std::to_string(i));
    }
    for (Index i = 0; i < std::min(n, d.z.rows()); ++i) {
        for (Index j = 0; j < d.z.cols(); ++j) {
            if (!std::isfinite(d.z(i, j))) note("z not finite at row " + std::to_string(i) + ", column " + std::to_string(j));
        }
    }
    for (Index i = 0; i < std::min(n, d.x.rows()); ++i) {
        for (Index j = 0; j < d.x.cols(); ++j) {
            if (!std::isfinite(d.x(i, j))) note("x not finite at row " + std::to_string(i) + ", column " + std::to_string(j));
        }
    }
    for (Index i = 0; i < std::min(n, d.y.size()); ++i) {
        if (!std::isfinite(d.y[i])) note("y not finite at row " + std::to_string(i));
    }
    if (d.u) {
        for (Index i = 0; i < std::min(n, d.u->size()); ++i) {
            if ((*d.u)[i] < 0) note("u negative at row " + std::to_string(i));
        }
    }

    if (n > 0) {
        const Index n1 = (d.t.array() == 1).count();
        if (n1 == 0) note("treatment arm 1 empty");
        if (n1 == n) note("treatment arm 0 empty");
    }
    return violations;
}

std::pair<Dataset, Dataset> split_by_treatment(const Dataset& d) {
    std::vector<Index> rows0;
    std::vector<Index> rows1;
    for (Index i = 0; i < d.n(); ++i) {
        (d.t[i] == 1 ? rows1 : rows0).push_back(i);
    }
    if (rows0.empty()) throw EmptyArm("treatment arm 0 is empty");
    if (rows1.empty()) throw EmptyArm("treatment arm 1 is empty");
    return {take_rows(d, rows0), take_rows(d, rows1)};
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
    const auto header = split_line(line);

    Index d_z = 0;
    Index d_x = 0;
    bool has_u = false;
    std::size_t pos = 0;
    while (pos < header.size() && header[pos] == "z" + std::to_string(pos + 1)) {
        ++d_z;
        ++pos;
    }
    while (pos < header.size() && header[pos] == "x" + std::to_string(pos - d_z + 1)) {
        ++d_x;
        ++pos;
    }
    if (d_z == 0 || d_x == 0 || pos + 2 > header.size() || header[pos] != "t" || header[pos + 1] != "y") {
        throw IoError("bad CSV header in " + path.string() + ": expected z1..zN,x1..xM,t,y[,u]");
    }
    pos += 2;
    if (pos < header.size()) {
        if (header[pos] != "u" || pos + 1 != header.size()) {
            throw IoError("bad CSV header in " + path.string() + ": trailing columns after y must be a single u");
        }
        has_u = true;
    }
    const std::size_t expected_cells = header.size();

    std::vector<double> zbuf, xbuf, ybuf;
    std::vector<int> tbuf, ubuf;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != expected_cells) {
            throw IoError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(expected_cells));
        }
        std::size_t c = 0;
        for (Index j = 0; j < d_z; ++j) zbuf.push_back(parse_double(cells[c], row, c)), ++c;
        for (Index j = 0; j < d_x; ++j) xbuf.push_back(parse_double(cells[c], row, c)), ++c;
        const double tv = parse_double(cells[c], row, c);
        ++c;
        if (!is_binary(tv)) throw IoError("t not binary at data row " + std::to_string(row));
        tbuf.push_back(static_cast<int>(tv));
        ybuf.push_back(parse_double(cells[c], row, c));
        ++c;
        if (has_u) ubuf.push_back(static_cast<int>(parse_double(cells[c], row, c)));
        ++row;
    }

    Dataset d;
    const Index n = static_cast<Index>(row);
    d.z.resize(n, d_z);
    d.x.resize(n, d_x);
    d.t.resize(n);
    d.y.resize(n);
    if (has_u) d.u.emplace(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d_z; ++j) d.z(i, j) = zbuf[static_cast<std::size_t>(i * d_z + j)];
        for (Index j = 0; j < d_x; ++j) d.x(i, j) = xbuf[static_cast<std::size_t>(i * d_x + j)];
        d.t[i] = tbuf[static_cast<std::size_t>(i)];
        d.y[i] = ybuf[static_cast<std::size_t>(i)];
        if (has_u) (*d.u)[i] = ubuf[static_cast<std::size_t>(i)];
    }
    return d;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    for (Index j = 0; j < d.d_z(); ++j) out << "z" << (j + 1) << ",";
    for (Index j = 0; j < d.d_x(); ++j) out << "x" << (j + 1) << ",";
    out << "t,y";
    if (d.u) out << ",u";
    out << "\n";

    for (Index i = 0; i < d.n(); ++i) {
        for (Index j = 0; j < d.d_z(); ++j) out << format_double(d.z(i, j)) << ",";
        for (Index j = 0; j < d.d_x(); ++j) out << format_double(d.x(i, j)) << ",";
        out << d.t[i] << "," << format_double(d.y[i]);
        if (d.u) out << "," << (*d.u)[i];
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace spomix
