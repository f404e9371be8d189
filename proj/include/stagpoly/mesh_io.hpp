#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "polymesh.hpp"

namespace stagpoly {

/// Parses a mesh document:
///   {"vertices": [[x, y], ...], "cells": [[v0, v1, ...], ...],
///    "boundary_markers": [{"edge": [v0, v1], "tag": t}, ...], "mesh_size": h}
/// The last two members are optional.
inline PolyMesh load_mesh(const nlohmann::json& doc)
{
    if (!doc.is_object()) fail(ErrorKind::validation, "mesh document must be an object");
    if (!doc.contains("vertices") || !doc.contains("cells"))
        fail(ErrorKind::validation, "mesh document needs 'vertices' and 'cells'");
    std::vector<Point2> vertices;
    std::vector<std::vector<int>> cells;
    std::vector<MarkerSpec> markers;
    std::optional<double> mesh_size;
    try {
        for (const auto& v : doc.at("vertices")) {
            if (!v.is_array() || v.size() != 2) fail(ErrorKind::validation, "vertex must be [x, y]");
            vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
        for (const auto& c : doc.at("cells"))
            cells.push_back(c.get<std::vector<int>>());
        if (doc.contains("boundary_markers"))
            for (const auto& m : doc.at("boundary_markers")) {
                const auto e = m.at("edge").get<std::vector<int>>();
                if (e.size() != 2) fail(ErrorKind::validation, "boundary marker edge must be [v0, v1]");
                markers.push_back({e[0], e[1], m.at("tag").get<int>()});
            }
        if (doc.contains("mesh_size")) mesh_size = doc.at("mesh_size").get<double>();
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::validation, std::string("malformed mesh document: ") + ex.what());
    }
    return make_mesh(std::move(vertices), std::move(cells), markers, mesh_size);
}

inline PolyMesh load_mesh_string(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& ex) {
        fail(ErrorKind::validation, std::string("mesh document does not parse: ") + ex.what());
    }
    return load_mesh(doc);
}

inline PolyMesh load_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open mesh file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_mesh_string(buf.str());
}

namespace detail {
inline std::string full_precision(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
} // namespace detail

/// Writes the mesh document with every boundary edge's marker and 17
/// significant digits per coordinate.
inline void write_mesh(std::ostream& os, const PolyMesh& mesh)
{
    os << "{\n  \"vertices\": [";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        os << (i ? ",\n    " : "\n    ") << '[' << detail::full_precision(mesh.vertices[i].x()) << ", "
           << detail::full_precision(mesh.vertices[i].y()) << ']';
    }
    os << "\n  ],\n  \"cells\": [";
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        os << (c ? ",\n    " : "\n    ") << '[';
        for (std::size_t i = 0; i < mesh.cells[c].size(); ++i)
            os << (i ? ", " : "") << mesh.cells[c][i];
        os << ']';
    }
    os << "\n  ],\n  \"boundary_markers\": [";
    bool first = true;
    for (const auto& e : mesh.edges) {
        if (!e.is_boundary()) continue;
        os << (first ? "\n    " : ",\n    ") << "{\"edge\": [" << e.v[0] << ", " << e.v[1] << "], \"tag\": " << e.marker
           << '}';
        first = false;
    }
    os << "\n  ],\n  \"mesh_size\": " << detail::full_precision(mesh.mesh_size) << "\n}\n";
}

inline std::string mesh_to_string(const PolyMesh& mesh)
{
    std::ostringstream os;
    write_mesh(os, mesh);
    return os.str();
}

} // namespace stagpoly
