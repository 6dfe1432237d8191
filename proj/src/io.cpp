#include "fwi/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fwi {

namespace {

void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

void put_u16(std::ostream& os, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint8_t get_u8(std::istream& is) {
    const int c = is.get();
    if (c < 0) throw std::runtime_error("file: unexpected end of data");
    return static_cast<std::uint8_t>(c);
}

std::uint16_t get_u16(std::istream& is) {
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(get_u8(is)) << (8 * i);
    return v;
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8(is)) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8(is)) << (8 * i);
    return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void expect_magic(std::istream& is, const char* magic) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(std::string("file: bad magic, expected ") + magic);
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("file: cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
    std::ifstream is(path, mode);
    if (!is) throw std::runtime_error("file: cannot open '" + path + "' for reading");
    return is;
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& field) {
    const Grid& g = field.grid;
    os.write("FWIF", 4);
    put_u8(os, 1);
    put_u8(os, static_cast<std::uint8_t>(g.rank()));
    for (std::size_t d : g.dims) put_u64(os, d);
    for (double h : g.spacing) put_f64(os, h);
    for (double v : field.values) put_f64(os, v);
}

ScalarField read_field(std::istream& is, int ghost_layers) {
    expect_magic(is, "FWIF");
    const std::uint8_t version = get_u8(is);
    if (version != 1) throw std::runtime_error("field file: unsupported version");
    const std::uint8_t rank = get_u8(is);
    if (rank != 2 && rank != 3) throw std::runtime_error("field file: rank must be 2 or 3");
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = static_cast<std::size_t>(get_u64(is));
    std::vector<double> spacing(rank);
    for (auto& h : spacing) h = get_f64(is);
    ScalarField field(grid_from_spacing(dims, spacing, ghost_layers));
    for (double& v : field.values) v = get_f64(is);
    if (!is) throw std::runtime_error("field file: truncated payload");
    return field;
}

void write_field_file(const std::string& path, const ScalarField& field) {
    auto os = open_out(path, std::ios::binary);
    write_field(os, field);
}

ScalarField read_field_file(const std::string& path, int ghost_layers) {
    auto is = open_in(path, std::ios::binary);
    return read_field(is, ghost_layers);
}

void write_record(std::ostream& os, const ShotRecord& record) {
    os << "time";
    for (std::size_t s = 0; s < record.sensors.count(); ++s) os << ",s" << s;
    os << "\n";
    for (std::size_t n = 0; n <= record.time.n_steps; ++n) {
        os << fmt17(static_cast<double>(n) * record.time.dt);
        for (std::size_t s = 0; s < record.sensors.count(); ++s)
            os << ',' << fmt17(record.at(s, n));
        os << "\n";
    }
}

void write_record_file(const std::string& path, const ShotRecord& record) {
    auto os = open_out(path, std::ios::out);
    write_record(os, record);
}

RecordData read_record(std::istream& is) {
    RecordData out;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("record file: missing header");
    {
        std::stringstream header(line);
        std::string col;
        std::size_t cols = 0;
        while (std::getline(header, col, ',')) ++cols;
        if (cols < 2) throw std::runtime_error("record file: header needs time and sensors");
        out.n_sensors = cols - 1;
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            row.push_back(std::stod(cell, &pos));
        }
        if (row.size() != out.n_sensors + 1)
            throw std::runtime_error("record file: ragged row");
        out.times.push_back(row[0]);
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw std::runtime_error("record file: needs at least two steps");
    out.samples.assign(out.n_sensors * rows.size(), 0.0);
    for (std::size_t n = 0; n < rows.size(); ++n)
        for (std::size_t s = 0; s < out.n_sensors; ++s)
            out.samples[s * rows.size() + n] = rows[n][s + 1];
    return out;
}

RecordData read_record_file(const std::string& path) {
    auto is = open_in(path, std::ios::in);
    return read_record(is);
}

ShotRecord to_shot_record(const RecordData& data, const SensorArray& sensors) {
    if (sensors.count() != data.n_sensors)
        throw std::runtime_error("record file: sensor count mismatch");
    const TimeAxis time{data.times[1] - data.times[0], data.times.size() - 1};
    ShotRecord record(sensors, time);
    record.samples = data.samples;
    return record;
}

void NamedBlocks::add(const std::string& name, std::vector<double> values) {
    blocks.emplace_back(name, std::move(values));
}

const std::vector<double>& NamedBlocks::get(const std::string& name) const {
    for (const auto& [n, v] : blocks)
        if (n == name) return v;
    throw std::runtime_error("checkpoint: missing block '" + name + "'");
}

bool NamedBlocks::has(const std::string& name) const {
    for (const auto& [n, v] : blocks)
        if (n == name) return true;
    return false;
}

void write_blocks(std::ostream& os, const NamedBlocks& blocks) {
    os.write("FWIC", 4);
    put_u8(os, 1);
    put_u32(os, static_cast<std::uint32_t>(blocks.blocks.size()));
    for (const auto& [name, values] : blocks.blocks) {
        put_u16(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u64(os, values.size());
        for (double v : values) put_f64(os, v);
    }
}

NamedBlocks read_blocks(std::istream& is) {
    expect_magic(is, "FWIC");
    if (get_u8(is) != 1) throw std::runtime_error("checkpoint: unsupported version");
    const std::uint32_t count = get_u32(is);
    NamedBlocks out;
    for (std::uint32_t b = 0; b < count; ++b) {
        const std::uint16_t len = get_u16(is);
        std::string name(len, '\0');
        is.read(name.data(), len);
        const std::uint64_t n = get_u64(is);
        std::vector<double> values(n);
        for (double& v : values) v = get_f64(is);
        if (!is) throw std::runtime_error("checkpoint: truncated block");
        out.add(name, std::move(values));
    }
    return out;
}

void write_blocks_file(const std::string& path, const NamedBlocks& blocks) {
    auto os = open_out(path, std::ios::binary);
    write_blocks(os, blocks);
}

NamedBlocks read_blocks_file(const std::string& path) {
    auto is = open_in(path, std::ios::binary);
    return read_blocks(is);
}

void write_text_matrix(std::ostream& os, const ScalarField& field) {
    const Grid& g = field.grid;
    const auto str = g.strides();
    if (g.rank() == 2) {
        for (std::size_t i = 0; i < g.dims[0]; ++i) {
            for (std::size_t j = 0; j < g.dims[1]; ++j) {
                if (j) os << ' ';
                os << fmt17(field.values[i * str[0] + j]);
            }
            os << "\n";
        }
    } else {
        for (std::size_t i = 0; i < g.dims[0]; ++i) {
            for (std::size_t j = 0; j < g.dims[1]; ++j) {
                for (std::size_t k = 0; k < g.dims[2]; ++k) {
                    if (k) os << ' ';
                    os << fmt17(field.values[i * str[0] + j * str[1] + k]);
                }
                os << "\n";
            }
            if (i + 1 < g.dims[0]) os << "\n";
        }
    }
}

void write_legacy_vtk(std::ostream& os, const ScalarField& field, const std::string& name) {
    const Grid& g = field.grid;
    const std::size_t nx = g.dims[0];
    const std::size_t ny = g.dims[1];
    const std::size_t nz = g.rank() == 3 ? g.dims[2] : 1;
    os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << nx << ' ' << ny << ' ' << nz << "\n";
    os << "ORIGIN 0 0 0\n";
    os << "SPACING " << fmt17(g.spacing[0]) << ' ' << fmt17(g.spacing[1]) << ' '
       << fmt17(g.rank() == 3 ? g.spacing[2] : 1.0) << "\n";
    os << "POINT_DATA " << g.num_nodes() << "\n";
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    // VTK iterates x fastest; our layout has the last axis fastest
    const auto str = g.strides();
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) {
                std::size_t idx = i * str[0] + j * str[1];
                if (g.rank() == 3) idx += k * str[2];
                os << fmt17(field.values[idx]) << "\n";
            }
}

}  // namespace fwi
