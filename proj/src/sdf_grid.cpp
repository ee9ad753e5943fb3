#include "surfgen/sdf_grid.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "surfgen/errors.hpp"

namespace surfgen {

SdfGrid::SdfGrid(int resolution, std::vector<double> values)
    : res_(resolution), values_(std::move(values)) {
    if (res_ < 2) throw ConfigError("grid resolution must be >= 2");
    const auto expected = static_cast<std::size_t>(res_) * res_ * res_;
    if (values_.size() != expected)
        throw ConfigError("grid value count does not match resolution^3");
}

FieldSample SdfGrid::sample(const Vec3& p) const {
    const double tol = 1e-12;
    if (p.x < -1.0 - tol || p.x > 1.0 + tol || p.y < -1.0 - tol || p.y > 1.0 + tol ||
        p.z < -1.0 - tol || p.z > 1.0 + tol) {
        std::ostringstream os;
        os << "point " << p << " outside [-1,1]^3";
        throw OutOfDomainError(os.str());
    }
    const double h = spacing();
    auto locate = [&](double c) {
        double u = (c + 1.0) / h;
        int i = std::clamp(static_cast<int>(u), 0, res_ - 2);
        return std::pair{i, std::clamp(u - i, 0.0, 1.0)};
    };
    auto [i, fx] = locate(p.x);
    auto [j, fy] = locate(p.y);
    auto [k, fz] = locate(p.z);

    const double c000 = at(i, j, k), c100 = at(i + 1, j, k);
    const double c010 = at(i, j + 1, k), c110 = at(i + 1, j + 1, k);
    const double c001 = at(i, j, k + 1), c101 = at(i + 1, j, k + 1);
    const double c011 = at(i, j + 1, k + 1), c111 = at(i + 1, j + 1, k + 1);

    // interpolate along x, then y, then z
    const double c00 = c000 + fx * (c100 - c000);
    const double c10 = c010 + fx * (c110 - c010);
    const double c01 = c001 + fx * (c101 - c001);
    const double c11 = c011 + fx * (c111 - c011);
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);

    FieldSample s;
    s.value = c0 + fz * (c1 - c0);

    const double dx0 = (c100 - c000) + fy * ((c110 - c010) - (c100 - c000));
    const double dx1 = (c101 - c001) + fy * ((c111 - c011) - (c101 - c001));
    s.gradient.x = (dx0 + fz * (dx1 - dx0)) / h;
    const double dy0 = (c10 - c00), dy1 = (c11 - c01);
    s.gradient.y = (dy0 + fz * (dy1 - dy0)) / h;
    s.gradient.z = (c1 - c0) / h;
    return s;
}

SdfGrid load_sdf_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open grid file: " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version, rtok, etok;
    hs >> magic >> version >> rtok >> etok;
    if (magic != "SDFGRID" || version != "v1" || rtok.rfind("R=", 0) != 0)
        throw IoError("bad SDFGRID header: " + header);
    const int res = std::stoi(rtok.substr(2));
    const auto count = static_cast<std::size_t>(res) * res * res;
    std::vector<float> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw IoError("truncated grid file: " + path);
    std::vector<double> values(raw.begin(), raw.end());
    return SdfGrid(res, std::move(values));
}

void save_sdf_grid(const SdfGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write grid file: " + path);
    out << "SDFGRID v1 R=" << grid.resolution() << " extent=-1,1\n";
    std::vector<float> raw(grid.values().begin(), grid.values().end());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace surfgen
