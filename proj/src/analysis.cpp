#include "polywave/analysis.hpp"

#include <cmath>
#include <random>

#include "polywave/assembly.hpp"
#include "polywave/errors.hpp"

namespace polywave {

ErrorReport error_norms(const State& state, const ExactSolution& exact, const DgSpace& space,
                        const MaterialParams& mat, const StabilizationParams& stab) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    const double t = state.t;
    ErrorReport rep;
    rep.t = t;

    // Volume terms with elevated quadrature.
    const int vdeg = 2 * space.degree + 4;
    double l2 = 0.0, h1 = 0.0, dot_sq = 0.0, grad_aux_sq = 0.0;
    std::vector<double> val(n_loc), gx(n_loc), gy(n_loc);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& row = mat.of_cell(mesh.cells[c]);
        const double boc2 = row.b_over_c2();
        const double c2 = row.c2();
        CellQuadrature q = triangle_fan_quadrature(mesh.cells[c].sub_triangles, vdeg);
        const double* ps = &state.psi[space.offsets[c]];
        const double* pd = &state.psi_dot[space.offsets[c]];
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const Point2 x = q.points[k];
            evaluate_basis(space, c, x, val.data(), gx.data(), gy.data());
            double uh = 0.0, duh = 0.0;
            Point2 guh{0, 0}, gduh{0, 0};
            for (int i = 0; i < n_loc; ++i) {
                uh += ps[i] * val[i];
                duh += pd[i] * val[i];
                guh.x += ps[i] * gx[i];
                guh.y += ps[i] * gy[i];
                gduh.x += pd[i] * gx[i];
                gduh.y += pd[i] * gy[i];
            }
            const double w = q.weights[k];
            const double e = exact.psi(x, t) - uh;
            const double edot = exact.psi_dot(x, t) - duh;
            const Point2 ge = exact.grad_psi(x, t) - guh;
            const Point2 gedot = exact.grad_psi_dot(x, t) - gduh;
            const Point2 ge_aux = ge + boc2 * gedot;
            l2 += w * e * e;
            h1 += w * dot(ge, ge);
            dot_sq += w * edot * edot;
            grad_aux_sq += w * c2 * dot(ge_aux, ge_aux);
        }
    }

    // Jump of the auxiliary error over all faces, elevated face rule.
    auto cache = build_face_cache(space, mat, stab, space.degree + 3, Exec::serial);
    double jump_sq = 0.0;
    std::vector<double> vb(n_loc);
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const FaceCache& fc = cache[fi];
        const auto& row_p = mat.of_cell(mesh.cells[f.plus_cell]);
        for (std::size_t k = 0; k < fc.points.size(); ++k) {
            const Point2 x = fc.points[k];
            auto aux_trace = [&](int cell, const double* v, double boc2) {
                const double* ps = &state.psi[space.offsets[cell]];
                const double* pd = &state.psi_dot[space.offsets[cell]];
                double uh = 0.0, duh = 0.0;
                for (int i = 0; i < n_loc; ++i) {
                    uh += ps[i] * v[i];
                    duh += pd[i] * v[i];
                }
                const double ex = exact.psi(x, t) + boc2 * exact.psi_dot(x, t);
                return ex - (uh + boc2 * duh);
            };
            const double ep = aux_trace(f.plus_cell, &fc.val_plus[k * n_loc], row_p.b_over_c2());
            double jump = ep;
            if (f.kind == Face::Kind::interior) {
                const auto& row_m = mat.of_cell(mesh.cells[f.minus_cell]);
                const double em =
                    aux_trace(f.minus_cell, &fc.val_minus[k * n_loc], row_m.b_over_c2());
                jump = ep - em;
            }
            jump_sq += fc.weights[k] * fc.chi * jump * jump;
        }
    }

    rep.l2_error = std::sqrt(l2);
    rep.h1_broken_error = std::sqrt(h1);
    rep.jump_norm = std::sqrt(jump_sq);
    rep.energy_norm_error = std::sqrt(dot_sq + grad_aux_sq + jump_sq);
    return rep;
}

EnergyEvaluator::EnergyEvaluator(const DgSpace& space, const MaterialParams& mat,
                                 const StabilizationParams& stab)
    : space_(&space), mat_(mat) {
    cache_ = build_face_cache(space, mat, stab, 0, Exec::serial);
    const int n_loc = space.n_loc;
    const int n_cells = space.mesh->n_cells();
    gx_.resize(n_cells);
    gy_.resize(n_cells);
    std::vector<double> val(n_loc);
    for (int c = 0; c < n_cells; ++c) {
        const CellQuadrature& q = space.quad[c];
        gx_[c].resize(q.points.size() * n_loc);
        gy_[c].resize(q.points.size() * n_loc);
        for (std::size_t k = 0; k < q.points.size(); ++k)
            evaluate_basis(space, c, q.points[k], val.data(), &gx_[c][k * n_loc],
                           &gy_[c][k * n_loc]);
    }
}

EnergyComponents EnergyEvaluator::eval(const State& state, double accumulated_damping) const {
    const DgSpace& space = *space_;
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    EnergyComponents e;
    e.damping_accumulated = accumulated_damping;

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& row = mat_.of_cell(mesh.cells[c]);
        const double two_k = 2.0 * row.k();
        const double boc2 = row.b_over_c2();
        const double c2 = row.c2();
        const CellQuadrature& q = space.quad_cubic[c];
        const std::vector<double>& vals = space.values_cubic[c];
        const double* ps = &state.psi[space.offsets[c]];
        const double* pd = &state.psi_dot[space.offsets[c]];
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double* v = &vals[k * n_loc];
            double duh = 0.0;
            for (int i = 0; i < n_loc; ++i) duh += pd[i] * v[i];
            const double alpha = 1.0 - two_k * duh;
            if (alpha <= 0.0) e.degenerate = true;
            e.kinetic += q.weights[k] * alpha * duh * duh;
        }
        const CellQuadrature& q2 = space.quad[c];
        for (std::size_t k = 0; k < q2.points.size(); ++k) {
            const double* gx = &gx_[c][k * n_loc];
            const double* gy = &gy_[c][k * n_loc];
            Point2 g{0, 0};
            for (int i = 0; i < n_loc; ++i) {
                const double a = ps[i] + boc2 * pd[i];
                g.x += a * gx[i];
                g.y += a * gy[i];
            }
            e.gradient += q2.weights[k] * c2 * dot(g, g);
        }
    }

    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const FaceCache& fc = cache_[fi];
        for (std::size_t k = 0; k < fc.points.size(); ++k) {
            auto aux_trace = [&](int cell, const double* v) {
                const auto& row = mat_.of_cell(mesh.cells[cell]);
                const double* ps = &state.psi[space.offsets[cell]];
                const double* pd = &state.psi_dot[space.offsets[cell]];
                double s = 0.0;
                for (int i = 0; i < n_loc; ++i) s += (ps[i] + row.b_over_c2() * pd[i]) * v[i];
                return s;
            };
            double jump = aux_trace(f.plus_cell, &fc.val_plus[k * n_loc]);
            if (f.kind == Face::Kind::interior)
                jump -= aux_trace(f.minus_cell, &fc.val_minus[k * n_loc]);
            e.jump += fc.weights[k] * fc.chi * jump * jump;
        }
    }
    e.total = e.kinetic + e.damping_accumulated + e.gradient + e.jump;
    return e;
}

EnergyComponents discrete_energy(const State& state, double accumulated_damping,
                                 const DgSpace& space, const MaterialParams& mat,
                                 const StabilizationParams& stab) {
    return EnergyEvaluator(space, mat, stab).eval(state, accumulated_damping);
}

double damping_rate(const State& state, const DgSpace& space, const MaterialParams& mat) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    double total = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& row = mat.of_cell(mesh.cells[c]);
        if (row.b == 0.0) continue;
        const double two_k = 2.0 * row.k();
        const double boc2 = row.b_over_c2();
        const CellQuadrature& q = space.quad_cubic[c];
        const std::vector<double>& vals = space.values_cubic[c];
        const double* pd = &state.psi_dot[space.offsets[c]];
        const double* pdd = &state.psi_ddot[space.offsets[c]];
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double* v = &vals[k * n_loc];
            double duh = 0.0, dduh = 0.0;
            for (int i = 0; i < n_loc; ++i) {
                duh += pd[i] * v[i];
                dduh += pdd[i] * v[i];
            }
            total += q.weights[k] * boc2 * (1.0 - two_k * duh) * dduh * dduh;
        }
    }
    return total;
}

double field_l2_norm(std::span<const double> coeffs) {
    double s = 0.0;
    for (double c : coeffs) s += c * c;
    return std::sqrt(s);
}

double quantity_of_interest(std::span<const State> trajectory) {
    if (trajectory.empty()) throw ConfigError("quantity_of_interest: empty trajectory");
    double q = 0.0;
    for (const State& s : trajectory) q = std::max(q, field_l2_norm(s.psi));
    return q;
}

double pair_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

void convergence_rates(ConvergenceTable& table) {
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        ConvergenceRow& fine = table.rows[i];
        const ConvergenceRow& coarse = table.rows[i - 1];
        if (!(fine.h_max < coarse.h_max))
            throw ConfigError("convergence_rates: levels must be strictly refined");
        fine.has_rates = fine.l2_err > 0.0 && coarse.l2_err > 0.0;
        if (fine.l2_err > 0.0 && coarse.l2_err > 0.0)
            fine.rate_l2 = pair_rate(coarse.l2_err, fine.l2_err, coarse.h_max, fine.h_max);
        if (fine.h1_err > 0.0 && coarse.h1_err > 0.0)
            fine.rate_h1 = pair_rate(coarse.h1_err, fine.h1_err, coarse.h_max, fine.h_max);
        if (fine.energy_err > 0.0 && coarse.energy_err > 0.0)
            fine.rate_energy =
                pair_rate(coarse.energy_err, fine.energy_err, coarse.h_max, fine.h_max);
    }
}

QoIFit fit_qoi(std::span<const std::pair<double, double>> pairs, int p) {
    if (pairs.size() < 3) throw ConfigError("fit_qoi: need at least 3 (h, Q) pairs");
    QoIFit fit;
    fit.p = p;
    fit.pairs.assign(pairs.begin(), pairs.end());
    const double m = p + 1;
    // Normal equations for the 2-column design [1, h^{p+1}].
    double s00 = 0.0, s01 = 0.0, s11 = 0.0, r0 = 0.0, r1 = 0.0;
    for (const auto& [h, q] : pairs) {
        const double hm = std::pow(h, m);
        s00 += 1.0;
        s01 += hm;
        s11 += hm * hm;
        r0 += q;
        r1 += hm * q;
    }
    const double det = s00 * s11 - s01 * s01;
    const double scale = s00 * s11 + s01 * s01;
    if (!(std::abs(det) > 1e-14 * scale))
        throw NumericError("fit_qoi: rank-deficient design (all h^{p+1} equal?)");
    fit.q1 = (s11 * r0 - s01 * r1) / det;
    fit.q2 = (s00 * r1 - s01 * r0) / det;
    double res = 0.0;
    for (const auto& [h, q] : pairs) {
        const double d = q - (fit.q1 + fit.q2 * std::pow(h, m));
        res += d * d;
    }
    fit.residual = std::sqrt(res);
    return fit;
}

double trace_ratio_diagnostic(const DgSpace& space, const MaterialParams& mat,
                              const StabilizationParams& stab, int n_samples,
                              std::uint64_t rng_seed) {
    if (n_samples < 1) throw ConfigError("trace_ratio_diagnostic: need n_samples >= 1");
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    const double c = mat.regions[0].c;

    std::mt19937_64 rng(rng_seed);
    auto uniform = [&rng] { return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0; };

    // Full gradient traces at face quadrature points (the assembly cache keeps
    // only normal derivatives).
    const int nq = space.degree + 2;
    struct GradTrace {
        std::vector<Point2> pts;
        std::vector<double> w;
        std::vector<double> gxp, gyp, gxm, gym;
    };
    std::vector<GradTrace> traces(mesh.faces.size());
    std::vector<double> val(n_loc), gx(n_loc), gy(n_loc);
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        GradTrace& tr = traces[fi];
        SegmentQuadrature q = segment_quadrature(f.endpoints[0], f.endpoints[1], nq);
        tr.pts = std::move(q.points);
        tr.w = std::move(q.weights);
        auto fill = [&](int cell, std::vector<double>& ox, std::vector<double>& oy) {
            ox.resize(tr.pts.size() * n_loc);
            oy.resize(tr.pts.size() * n_loc);
            for (std::size_t k = 0; k < tr.pts.size(); ++k) {
                evaluate_basis(space, cell, tr.pts[k], val.data(), gx.data(), gy.data());
                for (int i = 0; i < n_loc; ++i) {
                    ox[k * n_loc + i] = gx[i];
                    oy[k * n_loc + i] = gy[i];
                }
            }
        };
        fill(f.plus_cell, tr.gxp, tr.gyp);
        if (f.kind == Face::Kind::interior) fill(f.minus_cell, tr.gxm, tr.gym);
    }

    double max_ratio = -1.0;
    std::vector<double> coeffs(space.n_dofs);
    for (int s = 0; s < n_samples; ++s) {
        for (double& x : coeffs) x = uniform();

        double grad_sq = 0.0;
        for (int cell = 0; cell < mesh.n_cells(); ++cell) {
            const CellQuadrature& q = space.quad[cell];
            const double* co = &coeffs[space.offsets[cell]];
            for (std::size_t k = 0; k < q.points.size(); ++k) {
                evaluate_basis(space, cell, q.points[k], val.data(), gx.data(), gy.data());
                Point2 g{0, 0};
                for (int i = 0; i < n_loc; ++i) {
                    g.x += co[i] * gx[i];
                    g.y += co[i] * gy[i];
                }
                grad_sq += q.weights[k] * dot(g, g);
            }
        }
        if (grad_sq <= 1e-28) continue; // vanishing gradient: skip the sample

        double avg_sq = 0.0;
        for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
            const Face& f = mesh.faces[fi];
            const GradTrace& tr = traces[fi];
            const double chi = stabilization_chi(f, mesh, mat, stab);
            const double* cp = &coeffs[space.offsets[f.plus_cell]];
            const double* cm =
                f.kind == Face::Kind::interior ? &coeffs[space.offsets[f.minus_cell]] : nullptr;
            for (std::size_t k = 0; k < tr.pts.size(); ++k) {
                Point2 gp{0, 0};
                for (int i = 0; i < n_loc; ++i) {
                    gp.x += cp[i] * tr.gxp[k * n_loc + i];
                    gp.y += cp[i] * tr.gyp[k * n_loc + i];
                }
                Point2 avg = gp;
                if (cm) {
                    Point2 gm{0, 0};
                    for (int i = 0; i < n_loc; ++i) {
                        gm.x += cm[i] * tr.gxm[k * n_loc + i];
                        gm.y += cm[i] * tr.gym[k * n_loc + i];
                    }
                    avg = 0.5 * (gp + gm);
                }
                avg_sq += tr.w[k] * dot(avg, avg) / chi;
            }
        }
        const double ratio = std::sqrt(avg_sq) * c * std::sqrt(stab.beta) / std::sqrt(grad_sq);
        max_ratio = std::max(max_ratio, ratio);
    }
    if (max_ratio < 0.0)
        throw NumericError("trace_ratio_diagnostic: all samples had vanishing gradients");
    return max_ratio;
}

} // namespace polywave
