#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "assembly.hpp"
#include "error.hpp"

namespace stagpoly {

/// Face-only Schur complement of a reduced system whose trailing unknowns are
/// the cell DoFs. The cell blocks are block diagonal (cells only couple through
/// faces), so elimination and recovery are cell-local.
class CondensedSystem {
public:
    SparseMatrix S;
    Eigen::VectorXd g;

    int num_face_unknowns() const { return num_faces_; }
    int num_total_unknowns() const { return num_total_; }

    /// Cell unknowns from the face unknowns; returns the full reduced vector.
    Eigen::VectorXd recover(const Eigen::VectorXd& faces) const
    {
        Eigen::VectorXd x(num_total_);
        x.head(num_faces_) = faces;
        for (const auto& blk : blocks_) {
            Eigen::VectorXd rhs = blk.rhs;
            for (std::size_t i = 0; i < blk.face_rows.size(); ++i)
                rhs -= blk.coupling.row(static_cast<Eigen::Index>(i)).transpose() * faces[blk.face_rows[i]];
            x.segment(blk.offset, blk.dim) = blk.chol.solve(rhs);
        }
        return x;
    }

private:
    struct CellBlock {
        int offset = 0;
        int dim = 0;
        std::vector<int> face_rows;       // reduced indices of the coupled face unknowns
        Eigen::MatrixXd coupling;         // A(face_rows, cell block)
        Eigen::VectorXd rhs;              // b(cell block)
        Eigen::LLT<Eigen::MatrixXd> chol; // of A(cell block, cell block)
    };

    friend CondensedSystem static_condensation(const ReducedSystem& red, const DofMap& dofs);

    int num_faces_ = 0;
    int num_total_ = 0;
    std::vector<CellBlock> blocks_;
};

inline CondensedSystem static_condensation(const ReducedSystem& red, const DofMap& dofs)
{
    CondensedSystem out;
    out.num_total_ = red.size();
    int nf = 0;
    while (nf < red.size() && red.free_to_global[nf] < dofs.num_face_dofs())
        ++nf;
    out.num_faces_ = nf;
    const int ncd = dofs.cell_dim();
    if ((red.size() - nf) % ncd != 0) fail(ErrorKind::condensation, "cell unknowns are not in whole cell blocks");
    const int ncells = (red.size() - nf) / ncd;

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> trips;
    for (int j = 0; j < nf; ++j)
        for (SparseMatrix::InnerIterator it(red.A, j); it; ++it)
            if (it.row() < nf) trips.emplace_back(static_cast<int>(it.row()), j, it.value());

    out.g = red.b.head(nf);
    out.blocks_.resize(ncells);
    for (int c = 0; c < ncells; ++c) {
        auto& blk = out.blocks_[c];
        blk.offset = nf + c * ncd;
        blk.dim = ncd;
        Eigen::MatrixXd a00 = Eigen::MatrixXd::Zero(ncd, ncd);
        for (int j = 0; j < ncd; ++j)
            for (SparseMatrix::InnerIterator it(red.A, blk.offset + j); it; ++it) {
                const int row = static_cast<int>(it.row());
                if (row < nf)
                    blk.face_rows.push_back(row);
                else if (row >= blk.offset && row < blk.offset + ncd)
                    a00(row - blk.offset, j) = it.value();
                else
                    fail(ErrorKind::condensation, "cell block " + std::to_string(c) + " couples to another cell");
            }
        std::sort(blk.face_rows.begin(), blk.face_rows.end());
        blk.face_rows.erase(std::unique(blk.face_rows.begin(), blk.face_rows.end()), blk.face_rows.end());
        blk.coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(blk.face_rows.size()), ncd);
        for (int j = 0; j < ncd; ++j)
            for (SparseMatrix::InnerIterator it(red.A, blk.offset + j); it; ++it) {
                const int row = static_cast<int>(it.row());
                if (row >= nf) continue;
                const auto pos = std::lower_bound(blk.face_rows.begin(), blk.face_rows.end(), row) - blk.face_rows.begin();
                blk.coupling(pos, j) = it.value();
            }
        blk.rhs = red.b.segment(blk.offset, ncd);
        blk.chol.compute(a00);
        if (blk.chol.info() != Eigen::Success || !(blk.chol.rcond() > 1e-14))
            fail(ErrorKind::condensation, "cell block " + std::to_string(c) + " is singular");

        const Eigen::MatrixXd y = blk.chol.solve(blk.coupling.transpose()); // A00^{-1} B^T
        const Eigen::VectorXd w = blk.chol.solve(blk.rhs);
        const auto nl = static_cast<Eigen::Index>(blk.face_rows.size());
        for (Eigen::Index i = 0; i < nl; ++i) {
            out.g[blk.face_rows[i]] -= blk.coupling.row(i).dot(w);
            for (Eigen::Index j = i; j < nl; ++j) {
                const double v = -blk.coupling.row(i).dot(y.col(j));
                trips.emplace_back(blk.face_rows[i], blk.face_rows[j], v);
                if (j != i) trips.emplace_back(blk.face_rows[j], blk.face_rows[i], v);
            }
        }
    }
    out.S.resize(nf, nf);
    out.S.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace stagpoly
