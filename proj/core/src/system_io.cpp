#include "mdprec/system_io.hpp"

#include <fstream>
#include <sstream>

#include "json_convert.hpp"
#include "mdprec/errors.hpp"

namespace mdprec {

using detail::json;

void save_system(const BlockSystem& sys, const std::filesystem::path& dir,
                 const probgen::GenMetadata* meta, const probgen::GenConfig* gen, mm::FloatFormat fmt) {
    validate(sys);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    mm::write_matrix(dir / "a.mtx", sys.a, fmt);
    mm::write_matrix(dir / "b1t.mtx", sys.b1t, fmt);
    mm::write_matrix(dir / "b2.mtx", sys.b2, fmt);
    mm::write_matrix(dir / "c.mtx", sys.c, fmt);
    mm::write_vector(dir / "rhs.vec", monolithic_rhs(sys), fmt);

    json j;
    j["version"] = 1;
    j["sizes"] = {{"beam", sys.n_beam()}, {"solid", sys.n_solid()}};
    j["beam_block_boundaries"] = sys.beam_block_boundaries;
    json fibers = json::array();
    if (meta) {
        for (const auto& f : meta->fibers) {
            fibers.push_back({{"start", f.start}, {"end", f.end}, {"elements", f.elements}});
        }
    }
    j["fibers"] = fibers;
    j["gen_config"] = gen ? detail::gen_to_json(*gen) : json::object();
    j["nnz"] = {{"a", sys.a.nnz()}, {"b1t", sys.b1t.nnz()}, {"b2", sys.b2.nnz()}, {"c", sys.c.nnz()}};

    const auto path = dir / "meta.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

LoadedSystem load_system(const std::filesystem::path& dir) {
    const auto meta_path = dir / "meta.json";
    std::ifstream in(meta_path);
    if (!in) throw IoError("cannot open " + meta_path.string());
    std::ostringstream text;
    text << in.rdbuf();
    json j;
    try {
        j = json::parse(text.str());
    } catch (const json::parse_error& e) {
        throw IoError(meta_path.string() + ": " + e.what());
    }
    LoadedSystem out;
    out.meta_json = text.str();
    Index n_beam = 0, n_solid = 0;
    try {
        n_beam = j.at("sizes").at("beam").get<Index>();
        n_solid = j.at("sizes").at("solid").get<Index>();
        out.system.beam_block_boundaries = j.at("beam_block_boundaries").get<std::vector<Index>>();
    } catch (const json::exception& e) {
        throw IoError(meta_path.string() + ": " + e.what());
    }

    BlockSystem& sys = out.system;
    sys.a = mm::read_matrix(dir / "a.mtx");
    sys.b1t = mm::read_matrix(dir / "b1t.mtx");
    sys.b2 = mm::read_matrix(dir / "b2.mtx");
    sys.c = mm::read_matrix(dir / "c.mtx");
    if (sys.n_beam() != n_beam || sys.n_solid() != n_solid) {
        throw DimensionError("load_system: block sizes differ from meta.json sizes");
    }
    const auto rhs_path = dir / "rhs.vec";
    if (std::filesystem::exists(rhs_path)) {
        const Vector rhs = mm::read_vector(rhs_path);
        if (rhs.size() != n_beam + n_solid) {
            throw DimensionError("load_system: rhs.vec has " + std::to_string(rhs.size()) +
                                 " entries, expected " + std::to_string(n_beam + n_solid));
        }
        sys.rhs_beam.assign(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(n_beam));
        sys.rhs_solid.assign(rhs.begin() + static_cast<std::ptrdiff_t>(n_beam), rhs.end());
    } else {
        sys.rhs_beam.assign(n_beam, 0.0);
        sys.rhs_solid.assign(n_solid, 0.0);
        out.rhs_defaulted = true;
    }
    validate(sys);
    return out;
}

} // namespace mdprec
