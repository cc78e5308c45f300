#include "firecast/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace firecast {

namespace {

using ordered_json = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

void put_u32_le(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
    buf.push_back(static_cast<char>((v >> 16) & 0xFF));
    buf.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u64_le(std::string& buf, std::uint64_t v) {
    put_u32_le(buf, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
    put_u32_le(buf, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64_le(const unsigned char* p) {
    return static_cast<std::uint64_t>(get_u32_le(p)) |
           (static_cast<std::uint64_t>(get_u32_le(p + 4)) << 32);
}

std::string read_all_bytes(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void write_descriptor(const std::filesystem::path& path, const GridDescriptor& desc) {
    ordered_json j;
    j["variable"] = desc.variable;
    j["lat_count"] = desc.lat_count;
    j["lon_count"] = desc.lon_count;
    j["time_len"] = desc.time_len;
    j["order"] = desc.order;
    write_text_file(path, j.dump(2) + "\n");
}

GridDescriptor read_descriptor(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad descriptor " + path.string() + ": " + e.what());
    }
    GridDescriptor d;
    try {
        d.variable = j.at("variable").get<std::string>();
        d.lat_count = j.at("lat_count").get<int>();
        d.lon_count = j.at("lon_count").get<int>();
        d.time_len = j.at("time_len").get<int>();
        d.order = j.at("order").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad descriptor " + path.string() + ": " + e.what());
    }
    if (d.order != "time,row,col") {
        throw IoError("unsupported payload order '" + d.order + "' in " + path.string());
    }
    return d;
}

void write_f32_payload(const std::filesystem::path& path, const std::vector<double>& values) {
    std::string buf;
    buf.reserve(values.size() * 4);
    for (double v : values) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        put_u32_le(buf, bits);
    }
    auto out = open_out(path, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f32_payload(const std::filesystem::path& path) {
    const std::string raw = read_all_bytes(path);
    if (raw.size() % 4 != 0) throw IoError("float32 payload truncated: " + path.string());
    std::vector<double> out(raw.size() / 4);
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint32_t bits = get_u32_le(p + 4 * i);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        out[i] = static_cast<double>(f);
    }
    return out;
}

void write_f64_payload(const std::filesystem::path& path, const double* values, std::size_t count) {
    std::string buf;
    buf.reserve(count * 8);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, values + i, sizeof bits);
        put_u64_le(buf, bits);
    }
    auto out = open_out(path, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f64_payload(const std::filesystem::path& path) {
    const std::string raw = read_all_bytes(path);
    if (raw.size() % 8 != 0) throw IoError("float64 payload truncated: " + path.string());
    std::vector<double> out(raw.size() / 8);
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t bits = get_u64_le(p + 8 * i);
        std::memcpy(&out[i], &bits, sizeof(double));
    }
    return out;
}

void write_byte_payload(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    auto out = open_out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_byte_payload(const std::filesystem::path& path) {
    const std::string raw = read_all_bytes(path);
    return std::vector<std::uint8_t>(raw.begin(), raw.end());
}

void write_series(const std::filesystem::path& dir, const std::string& stem,
                  const SnapshotSeries& series) {
    GridDescriptor d;
    d.variable = series.variable;
    d.lat_count = series.spec.lat_count;
    d.lon_count = series.spec.lon_count;
    d.time_len = series.time_len;
    write_descriptor(dir / (stem + ".json"), d);
    write_f32_payload(dir / (stem + ".f32"), series.data);
}

SnapshotSeries read_series(const std::filesystem::path& dir, const std::string& stem) {
    const GridDescriptor d = read_descriptor(dir / (stem + ".json"));
    SnapshotSeries s;
    s.spec = GridSpec{d.lat_count, d.lon_count};
    s.variable = d.variable;
    s.time_len = d.time_len;
    s.data = read_f32_payload(dir / (stem + ".f32"));
    const std::size_t expected =
        static_cast<std::size_t>(d.time_len) * static_cast<std::size_t>(d.lat_count) * d.lon_count;
    if (s.data.size() != expected) {
        throw IoError("payload size mismatch for " + stem + ": descriptor expects " +
                      std::to_string(expected) + " values, payload holds " +
                      std::to_string(s.data.size()));
    }
    return s;
}

void write_mask(const std::filesystem::path& dir, const std::string& stem, const LandMask& mask) {
    GridDescriptor d;
    d.variable = "mask";
    d.lat_count = mask.spec().lat_count;
    d.lon_count = mask.spec().lon_count;
    d.time_len = 1;
    write_descriptor(dir / (stem + ".json"), d);
    write_byte_payload(dir / (stem + ".bytes"), mask.land_bytes());
}

LandMask read_mask(const std::filesystem::path& dir, const std::string& stem) {
    const GridDescriptor d = read_descriptor(dir / (stem + ".json"));
    auto bytes = read_byte_payload(dir / (stem + ".bytes"));
    return LandMask(GridSpec{d.lat_count, d.lon_count}, std::move(bytes));
}

SnapshotSeries read_csv_series(const std::filesystem::path& path, const std::string& variable) {
    auto in = open_in(path, std::ios::in);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
    struct Row {
        int t, r, c;
        double v;
    };
    std::vector<Row> rows;
    int max_t = -1, max_r = -1, max_c = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row row{};
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &row.t, &row.r, &row.c, &row.v) != 4) {
            throw IoError("bad CSV row '" + line + "' in " + path.string());
        }
        if (row.t < 0 || row.r < 0 || row.c < 0) {
            throw IoError("negative index in CSV row '" + line + "'");
        }
        max_t = std::max(max_t, row.t);
        max_r = std::max(max_r, row.r);
        max_c = std::max(max_c, row.c);
        rows.push_back(row);
    }
    if (rows.empty()) throw IoError("CSV has no data rows: " + path.string());
    SnapshotSeries s;
    s.spec = GridSpec{max_r + 1, max_c + 1};
    s.variable = variable;
    s.time_len = max_t + 1;
    s.data.assign(static_cast<std::size_t>(s.time_len) * s.spec.cell_count(), 0.0);
    for (const Row& row : rows) s.at(row.t, row.r, row.c) = row.v;
    return s;
}

void write_csv_series(const std::filesystem::path& path, const SnapshotSeries& series) {
    auto out = open_out(path, std::ios::trunc);
    out << "time,row,col,value\n";
    for (int t = 0; t < series.time_len; ++t) {
        for (int r = 0; r < series.spec.lat_count; ++r) {
            for (int c = 0; c < series.spec.lon_count; ++c) {
                out << t << ',' << r << ',' << c << ',' << format_g17(series.at(t, r, c)) << '\n';
            }
        }
    }
}

std::string read_text_file(const std::filesystem::path& path) { return read_all_bytes(path); }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    auto out = open_out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string format_g17(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace firecast
