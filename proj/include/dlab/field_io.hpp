#pragma once
// Field serialization: one line of JSON metadata followed by the raw
// row-major 64-bit float payload.  Writes go through a temp file + rename
// so readers never observe a partial file.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dlab/grid.hpp"

namespace dlab {

inline void atomic_write(const std::string& path, const std::string& bytes) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), "atomic_write: cannot open " + tmp);
        out.write(bytes.data(), (std::streamsize)bytes.size());
        require(out.good(), "atomic_write: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline void save_field(const ScalarField& f, const std::string& path,
                       const std::string& note = "") {
    nlohmann::ordered_json hdr;
    hdr["format"] = "dlab-field-v1";
    hdr["dim"] = f.grid.dim;
    hdr["n"] = f.grid.n;
    hdr["dtype"] = "float64-le";
    hdr["layout"] = "row-major";
    if (!note.empty()) hdr["note"] = note;
    std::string blob = hdr.dump();
    blob += '\n';
    blob.append(reinterpret_cast<const char*>(f.v.data()), f.v.size() * sizeof(double));
    atomic_write(path, blob);
}

inline ScalarField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "load_field: cannot open " + path);
    std::string line;
    std::getline(in, line);
    nlohmann::json hdr = nlohmann::json::parse(line);
    require(hdr.value("format", "") == "dlab-field-v1", "load_field: bad header in " + path);
    Grid g(hdr.at("dim").get<int>(), hdr.at("n").get<int>());
    ScalarField f(g);
    in.read(reinterpret_cast<char*>(f.v.data()), (std::streamsize)(f.v.size() * sizeof(double)));
    require((std::size_t)in.gcount() == f.v.size() * sizeof(double),
            "load_field: truncated payload in " + path);
    return f;
}

}  // namespace dlab
