#include "forcerecon/spectral/snapshot_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace forcerecon {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d) {
    std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

std::string header(const WaveGrid& g) {
    std::string out(kMagic, 4);
    out.push_back(static_cast<char>(g.dim()));
    put_u32(out, static_cast<std::uint32_t>(g.max_wavenumber()));
    return out;
}

void put_field(std::string& out, const ScalarField& f) {
    for (const auto& c : f.coeffs()) {
        put_f64(out, c.real());
        put_f64(out, c.imag());
    }
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open snapshot " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScalarField get_field(const WaveGrid& g, const std::string& bytes, std::size_t pos, const std::string& name) {
    ScalarField f(g);
    auto dst = f.raw();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double re = std::bit_cast<double>(get_le(bytes, pos + 16 * i, 8));
        const double im = std::bit_cast<double>(get_le(bytes, pos + 16 * i + 8, 8));
        dst[i] = Complex(re, im);
    }
    const double scale = std::max(1.0, f.max_abs());
    if (std::abs(f[g.zero_index()]) > 1e-12 * scale) throw SnapshotError(name + ": nonzero mean mode");
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(f[i] - std::conj(f[g.conjugate_index(i)])) > 1e-12 * scale)
            throw SnapshotError(name + ": coefficients are not conjugate-symmetric");
    f.symmetrize();
    return f;
}

}  // namespace

void write_file_atomically(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
    std::string out = header(f.grid());
    put_field(out, f);
    write_file_atomically(path, out);
}

void write_snapshot(const std::filesystem::path& path, const VectorField& f) {
    std::string out = header(f.grid());
    out.push_back(static_cast<char>(f.dim()));
    for (int a = 0; a < f.dim(); ++a) put_field(out, f[a]);
    write_file_atomically(path, out);
}

std::variant<ScalarField, VectorField> read_snapshot(const std::filesystem::path& path) {
    const std::string bytes = slurp(path);
    const std::string name = path.string();
    if (bytes.size() < 9 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw SnapshotError(name + ": not an SPF1 file");
    const int dim = static_cast<unsigned char>(bytes[4]);
    const auto K = static_cast<int>(get_le(bytes, 5, 4));
    if (dim != 2 && dim != 3) throw SnapshotError(name + ": bad dimension");
    if (K < 1 || K > 4096) throw SnapshotError(name + ": bad max wavenumber");
    const WaveGrid g(dim, K);
    const std::size_t payload = 16 * g.size();
    if (bytes.size() == 9 + payload) return get_field(g, bytes, 9, name);
    if (bytes.size() >= 10) {
        const int comps = static_cast<unsigned char>(bytes[9]);
        if (comps == dim && bytes.size() == 10 + payload * static_cast<std::size_t>(comps)) {
            std::vector<ScalarField> c;
            for (int a = 0; a < comps; ++a) c.push_back(get_field(g, bytes, 10 + payload * static_cast<std::size_t>(a), name));
            return VectorField(std::move(c));
        }
    }
    throw SnapshotError(name + ": length does not match header");
}

ScalarField read_scalar_snapshot(const std::filesystem::path& path) {
    auto v = read_snapshot(path);
    if (auto* s = std::get_if<ScalarField>(&v)) return *s;
    throw SnapshotError(path.string() + ": expected a scalar field");
}

VectorField read_vector_snapshot(const std::filesystem::path& path) {
    auto v = read_snapshot(path);
    if (auto* s = std::get_if<VectorField>(&v)) return *s;
    throw SnapshotError(path.string() + ": expected a vector field");
}

}  // namespace forcerecon
