#include "faz3d/volume_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

namespace faz3d {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatName = "faz3d-scan";
constexpr int kFormatVersion = 1;
constexpr const char* kAxisOrder = "x-fast, y-bscan, z-axial";
constexpr std::array<const char*, 4> kSurfaceNames{"ilm", "ipl", "opl", "rpe"};

std::string shortest(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf.data(), end);
}

std::string hex32(std::uint32_t v) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

std::vector<std::byte> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing file: " + path.string());
    in.seekg(0, std::ios::end);
    const auto n = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::byte> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (!in) throw Error("read failed: " + path.string());
    return bytes;
}

void write_file(const fs::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::byte> to_le_bytes(std::span<const float> values) {
    std::vector<std::byte> bytes(values.size() * sizeof(float));
    std::memcpy(bytes.data(), values.data(), bytes.size());
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < bytes.size(); i += 4) {
            std::swap(bytes[i], bytes[i + 3]);
            std::swap(bytes[i + 1], bytes[i + 2]);
        }
    }
    return bytes;
}

std::vector<float> from_le_bytes(std::vector<std::byte> bytes) {
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i + 3 < bytes.size(); i += 4) {
            std::swap(bytes[i], bytes[i + 3]);
            std::swap(bytes[i + 1], bytes[i + 2]);
        }
    }
    std::vector<float> values(bytes.size() / sizeof(float));
    std::memcpy(values.data(), bytes.data(), values.size() * sizeof(float));
    return values;
}

struct RawBlob {
    std::string file;
    std::vector<std::byte> bytes;
};

std::map<std::string, std::string> parse_meta(const std::string& text, const fs::path& path) {
    auto corrupt = [&](const std::string& why) {
        return Error("corrupt header in " + path.string() + ": " + why);
    };
    const auto pos = text.rfind("header_crc32 = ");
    if (pos == std::string::npos || (pos != 0 && text[pos - 1] != '\n')) throw corrupt("no header checksum");
    std::string stored = text.substr(pos + 15);
    while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
    const auto computed =
        crc32_of(std::as_bytes(std::span(text.data(), pos)));
    if (stored != hex32(computed)) throw corrupt("header checksum mismatch");

    std::map<std::string, std::string> kv;
    std::istringstream lines(text.substr(0, pos));
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw corrupt("malformed line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

template <class T>
T parse_number(const std::map<std::string, std::string>& kv, const std::string& key, const fs::path& path) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error("corrupt header in " + path.string() + ": missing key " + key);
    T value{};
    const auto& s = it->second;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw Error("corrupt header in " + path.string() + ": bad value for " + key);
    }
    return value;
}

std::vector<float> load_grid(const fs::path& dir, const std::string& file, std::size_t expected,
                             const std::map<std::string, std::string>& kv, const std::string& what) {
    auto bytes = read_file(dir / file);
    if (bytes.size() != expected * sizeof(float)) {
        throw Error("dimension mismatch: " + what + " holds " + std::to_string(bytes.size() / sizeof(float)) +
                    " values, expected " + std::to_string(expected));
    }
    const auto key = "crc32." + file;
    if (auto it = kv.find(key); it != kv.end()) {
        if (it->second != hex32(crc32_of(bytes))) throw Error("corrupt data: checksum mismatch in " + file);
    }
    auto values = from_le_bytes(std::move(bytes));
    for (float v : values) {
        if (!std::isfinite(v)) throw Error("non-finite value in " + file);
    }
    return values;
}

}  // namespace

std::uint32_t crc32_of(std::span<const std::byte> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
        const auto n = std::min(kChunk, bytes.size() - off);
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

void write_raw_f32(const fs::path& path, std::span<const float> values) {
    write_file(path, to_le_bytes(values));
}

std::vector<float> read_raw_f32(const fs::path& path, std::size_t expected_count) {
    auto bytes = read_file(path);
    if (bytes.size() != expected_count * sizeof(float)) {
        throw Error("dimension mismatch: " + path.string());
    }
    return from_le_bytes(std::move(bytes));
}

void write_raw_u8(const fs::path& path, std::span<const std::uint8_t> values) {
    write_file(path, std::as_bytes(values));
}

void save_scan(const Scan& scan, const fs::path& dir) {
    const auto& vol = scan.volume;
    const int nx = vol.nx(), ny = vol.ny(), nz = vol.nz();
    if (vol.data.empty()) throw Error("save_scan: empty volume");
    for (const auto* s : {&scan.surfaces.ilm, &scan.surfaces.ipl, &scan.surfaces.opl, &scan.surfaces.rpe}) {
        if (s->nx() != nx || s->ny() != ny) throw Error("save_scan: surface dims do not match volume");
    }
    for (const auto& e : scan.enfaces) {
        if (e.data.nx() != nx || e.data.ny() != ny) throw Error("save_scan: en face dims do not match volume");
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw Error("cannot create scan directory: " + dir.string());

    std::vector<RawBlob> blobs;
    blobs.push_back({"volume.raw", to_le_bytes(vol.data.values())});
    const std::array<const SurfaceMap*, 4> surfaces{&scan.surfaces.ilm, &scan.surfaces.ipl, &scan.surfaces.opl,
                                                    &scan.surfaces.rpe};
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        blobs.push_back({std::string("surface_") + kSurfaceNames[i] + ".raw", to_le_bytes(surfaces[i]->values())});
    }
    for (Plexus p : kAllPlexuses) {
        const auto& e = scan.enfaces[static_cast<std::size_t>(p)];
        blobs.push_back({"enface_" + std::string(plexus_name(p)) + ".raw", to_le_bytes(e.data.values())});
    }

    std::ostringstream meta;
    meta << "format = " << kFormatName << "\n"
         << "version = " << kFormatVersion << "\n"
         << "nx = " << nx << "\n"
         << "ny = " << ny << "\n"
         << "nz = " << nz << "\n"
         << "res_plane_um = " << shortest(vol.res_plane_um) << "\n"
         << "res_axial_um = " << shortest(vol.res_axial_um) << "\n"
         << "isotropic = " << (vol.isotropic ? 1 : 0) << "\n"
         << "dtype = float32\n"
         << "byte_order = little\n"
         << "axis_order = " << kAxisOrder << "\n";
    for (const auto& b : blobs) meta << "crc32." << b.file << " = " << hex32(crc32_of(b.bytes)) << "\n";
    std::string text = meta.str();
    text += "header_crc32 = " + hex32(crc32_of(std::as_bytes(std::span(text)))) + "\n";

    for (const auto& b : blobs) write_file(dir / b.file, b.bytes);
    write_file(dir / "meta", std::as_bytes(std::span(text)));
}

Scan load_scan(const fs::path& dir) {
    if (!fs::exists(dir)) throw Error("missing file: " + dir.string());
    const auto meta_bytes = read_file(dir / "meta");
    const std::string text(reinterpret_cast<const char*>(meta_bytes.data()), meta_bytes.size());
    const auto kv = parse_meta(text, dir / "meta");

    auto corrupt = [&](const std::string& why) { return Error("corrupt header in " + (dir / "meta").string() + ": " + why); };
    if (auto it = kv.find("format"); it == kv.end() || it->second != kFormatName) throw corrupt("unknown format");
    if (parse_number<int>(kv, "version", dir) != kFormatVersion) throw corrupt("unsupported version");
    if (auto it = kv.find("dtype"); it == kv.end() || it->second != "float32") throw corrupt("dtype must be float32");
    if (auto it = kv.find("byte_order"); it == kv.end() || it->second != "little") throw corrupt("byte_order must be little");
    if (auto it = kv.find("axis_order"); it == kv.end() || it->second != kAxisOrder) throw corrupt("unexpected axis_order");

    const int nx = parse_number<int>(kv, "nx", dir);
    const int ny = parse_number<int>(kv, "ny", dir);
    const int nz = parse_number<int>(kv, "nz", dir);
    if (nx <= 0 || ny <= 0 || nz <= 0) throw corrupt("dimensions must be positive");

    Scan scan;
    auto& vol = scan.volume;
    vol.res_plane_um = parse_number<double>(kv, "res_plane_um", dir);
    vol.res_axial_um = parse_number<double>(kv, "res_axial_um", dir);
    vol.isotropic = parse_number<int>(kv, "isotropic", dir) != 0;
    if (!(vol.res_plane_um > 0) || !(vol.res_axial_um > 0)) throw corrupt("resolutions must be > 0");

    const std::size_t plane = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    vol.data = ScalarVolume(nx, ny, nz);
    vol.data.storage() = load_grid(dir, "volume.raw", plane * static_cast<std::size_t>(nz), kv, "volume");
    for (float v : vol.data.values()) {
        if (v < 0) throw Error("negative intensity in volume.raw");
    }

    const std::array<SurfaceMap*, 4> surfaces{&scan.surfaces.ilm, &scan.surfaces.ipl, &scan.surfaces.opl,
                                              &scan.surfaces.rpe};
    const float z_max = static_cast<float>(nz - 1);
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        const std::string file = std::string("surface_") + kSurfaceNames[i] + ".raw";
        *surfaces[i] = SurfaceMap(nx, ny);
        surfaces[i]->storage() = load_grid(dir, file, plane, kv, std::string("surface ") + kSurfaceNames[i]);
        for (float& v : surfaces[i]->values()) v = std::clamp(v, 0.0f, z_max);
    }
    for (Plexus p : kAllPlexuses) {
        auto& e = scan.enfaces[static_cast<std::size_t>(p)];
        const std::string file = "enface_" + std::string(plexus_name(p)) + ".raw";
        e.plexus = p;
        e.data = ScalarImage(nx, ny);
        e.data.storage() = load_grid(dir, file, plane, kv, "en face " + std::string(plexus_name(p)));
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Measurements CSV

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string format_measurements(std::span<const FazMeasurement> records) {
    std::string out;
    for (std::size_t i = 0; i < kMeasurementColumns.size(); ++i) {
        if (i) out += ',';
        out += kMeasurementColumns[i];
    }
    out += '\n';
    for (const auto& r : records) {
        out += csv_escape(r.scan_id) + ',' + csv_escape(r.group_label) + ',' + fixed6(r.res_plane_um) + ',' +
               fixed6(r.area_svc_mm2) + ',' + fixed6(r.area_icp_mm2) + ',' + fixed6(r.area_dcp_mm2) + ',' +
               fixed6(r.volume_mm3) + ',' + (r.elapsed_seconds ? fixed6(*r.elapsed_seconds) : std::string()) + '\n';
    }
    return out;
}

void write_measurements(std::span<const FazMeasurement> records, const fs::path& path) {
    const auto text = format_measurements(records);
    write_file(path, std::as_bytes(std::span(text)));
}

std::vector<FazMeasurement> read_measurements(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open measurements CSV: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty measurements CSV: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() != kMeasurementColumns.size()) throw Error("unexpected CSV header in " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] != kMeasurementColumns[i]) throw Error("unexpected CSV column '" + header[i] + "'");
    }
    std::vector<FazMeasurement> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != kMeasurementColumns.size()) {
            throw Error("wrong field count on line " + std::to_string(line_no) + " of " + path.string());
        }
        auto num = [&](const std::string& s) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw Error("bad number '" + s + "' on line " + std::to_string(line_no));
            }
        };
        FazMeasurement r;
        r.scan_id = f[0];
        r.group_label = f[1];
        r.res_plane_um = num(f[2]);
        r.area_svc_mm2 = num(f[3]);
        r.area_icp_mm2 = num(f[4]);
        r.area_dcp_mm2 = num(f[5]);
        r.volume_mm3 = num(f[6]);
        if (!f[7].empty()) r.elapsed_seconds = num(f[7]);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace faz3d
