#include "ddp/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; byte swapping is not implemented");

namespace ddp {

namespace {

constexpr char kMagic[8] = {'D', 'D', 'P', 'S', 'I', 'M', '1', '\0'};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[noreturn]] void io_error(const std::string& path, const std::string& what) {
    throw std::runtime_error("io: " + what + " (" + path + ")");
}

} // namespace

void emit_timeseries(const std::vector<EntropyReport>& reports, const std::string& path) {
    if (reports.empty())
        throw std::invalid_argument("emit_timeseries: empty report sequence");
    std::ofstream os(path, std::ios::binary);
    if (!os) io_error(path, "cannot open for writing");
    os << "t,mass_n,mass_p,charge,linf_n,linf_p,l2_n,l2_p,entropy,dissipation,"
          "l1_dist_n,l1_dist_p\n";
    for (const auto& r : reports) {
        os << fmt17(r.t) << ',' << fmt17(r.mass_n) << ',' << fmt17(r.mass_p) << ','
           << fmt17(r.charge) << ',' << fmt17(r.linf_n) << ',' << fmt17(r.linf_p) << ','
           << fmt17(r.l2_n) << ',' << fmt17(r.l2_p) << ',' << fmt17(r.entropy) << ','
           << fmt17(r.dissipation) << ',' << fmt17(r.l1_dist_n) << ',' << fmt17(r.l1_dist_p)
           << '\n';
    }
    if (!os) io_error(path, "write failure");
}

void checkpoint_save(const CarrierState& s, const CheckpointMeta& meta,
                     const std::string& path) {
    const Grid& g = s.n.grid();
    std::ofstream os(path, std::ios::binary);
    if (!os) io_error(path, "cannot open for writing");

    os.write(kMagic, sizeof(kMagic));
    const std::uint32_t dim = static_cast<std::uint32_t>(g.dim());
    const std::uint32_t cells = static_cast<std::uint32_t>(g.cells_per_axis());
    os.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    os.write(reinterpret_cast<const char*>(&cells), sizeof(cells));
    const double header_f[4] = {g.half_width(), s.t, meta.epsilon, meta.alpha};
    os.write(reinterpret_cast<const char*>(header_f), sizeof(header_f));

    for (const ScalarField* f : {&s.n, &s.p, &s.psi}) {
        auto v = f->values();
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!os) io_error(path, "write failure");
}

Checkpoint checkpoint_load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) io_error(path, "cannot open for reading");

    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        io_error(path, "magic mismatch: not a DDPSIM1 checkpoint");

    std::uint32_t dim = 0, cells = 0;
    double header_f[4];
    is.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    is.read(reinterpret_cast<char*>(&cells), sizeof(cells));
    is.read(reinterpret_cast<char*>(header_f), sizeof(header_f));
    if (!is) io_error(path, "truncated header");

    Grid g(static_cast<int>(dim), header_f[0], static_cast<int>(cells));

    Checkpoint ck{g, header_f[1], {header_f[2], header_f[3]}, ScalarField(g), ScalarField(g),
                  ScalarField(g)};
    for (ScalarField* f : {&ck.n, &ck.p, &ck.psi}) {
        auto v = f->values();
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!is || is.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
            io_error(path, "truncated field data");
    }
    return ck;
}

} // namespace ddp
