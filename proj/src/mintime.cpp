#include "hjreach/mintime.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hjreach {

MinimalTimeField accumulate_min_time(const ValueEvolution& evolution) {
    if (evolution.snapshots.empty())
        throw std::invalid_argument("accumulate_min_time: empty evolution");
    MinTimeAccumulator acc(evolution.snapshots.front().grid);
    std::vector<const ScalarField*> ordered;
    for (const ScalarField& s : evolution.snapshots) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const ScalarField* a, const ScalarField* b) { return a->time_stamp < b->time_stamp; });
    for (const ScalarField* s : ordered) acc.observe(s->time_stamp, *s);
    return acc.take();
}

MinTimeAccumulator::MinTimeAccumulator(const GridSpec& grid) {
    field_.grid = grid;
    field_.times.assign(grid.size(), kInf);
}

void MinTimeAccumulator::observe(double t, const ScalarField& v) {
    for (std::size_t i = 0; i < field_.times.size(); ++i)
        if (field_.times[i] == kInf && v.values[i] <= 0.0) field_.times[i] = t;
}

double interp_min_time(const MinimalTimeField& field, std::span<const double> z) {
    const GridSpec& g = field.grid;
    if (static_cast<int>(z.size()) != g.dim())
        throw std::invalid_argument("interp_min_time: point rank mismatch");
    std::array<int, kMaxAxes> base{};
    std::array<double, kMaxAxes> frac{};
    for (int a = 0; a < g.dim(); ++a) {
        const Axis& ax = g.axis(a);
        const double p = z[static_cast<std::size_t>(a)];
        if (p < ax.lo || p > ax.hi) return kInf;
        double pos = (p - ax.lo) / ax.step();
        int i = std::clamp(static_cast<int>(std::floor(pos)), 0, ax.n - 2);
        base[static_cast<std::size_t>(a)] = i;
        frac[static_cast<std::size_t>(a)] = std::clamp(pos - i, 0.0, 1.0);
    }
    const int d = g.dim();
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const int bit = (corner >> a) & 1;
            w *= bit ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
            flat += static_cast<std::size_t>(base[static_cast<std::size_t>(a)] + bit) * g.stride(a);
        }
        const double tv = field.times[flat];
        if (tv == kInf) return kInf;  // conservative: prefer false-infeasible
        acc += w * tv;
    }
    return acc;
}

double interp_min_time(const MinimalTimeField& field, const State4& z) {
    const std::array<double, 4> p{z.x, z.y, z.psi, z.v};
    return interp_min_time(field, p);
}

State4 heun_step(const State4& z, const Control& u, double h) {
    const State4 k1 = point_mass_rhs(z, u);
    const State4 mid{z.x + h * k1.x, z.y + h * k1.y, z.psi + h * k1.psi, z.v + h * k1.v};
    const State4 k2 = point_mass_rhs(mid, u);
    return {z.x + 0.5 * h * (k1.x + k2.x), z.y + 0.5 * h * (k1.y + k2.y),
            z.psi + 0.5 * h * (k1.psi + k2.psi), z.v + 0.5 * h * (k1.v + k2.v)};
}

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::TargetReached: return "target-reached";
        case TerminationReason::Infeasible: return "infeasible";
        case TerminationReason::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

namespace {

State4 propagate(const State4& z, const Control& u, double h, int substeps) {
    State4 cur = z;
    const double hs = h / substeps;
    for (int k = 0; k < substeps; ++k) cur = heun_step(cur, u, hs);
    return cur;
}

}  // namespace

Trajectory reconstruct(const MinimalTimeField& field, const State4& z0,
                       const ReconstructionParams& params, const LevelSetExpr* constraint,
                       const CertificationContext* certification) {
    if (params.n_accel < 1 || params.n_yaw < 1)
        throw std::invalid_argument("reconstruct: control grid must be non-empty");
    if (params.substeps < 1) throw std::invalid_argument("reconstruct: substeps must be >= 1");

    std::vector<Control> controls;
    controls.reserve(static_cast<std::size_t>(params.n_accel) * static_cast<std::size_t>(params.n_yaw));
    const ControlBounds& b = params.bounds;
    for (int ia = 0; ia < params.n_accel; ++ia) {
        const double a = params.n_accel == 1
                             ? 0.5 * (b.a_min + b.a_max)
                             : b.a_min + (b.a_max - b.a_min) * ia / (params.n_accel - 1);
        for (int iw = 0; iw < params.n_yaw; ++iw) {
            const double w = params.n_yaw == 1
                                 ? 0.0
                                 : -b.w_max + 2.0 * b.w_max * iw / (params.n_yaw - 1);
            controls.push_back({a, w});
        }
    }

    Trajectory traj;
    auto record = [&](double t, const State4& z, const Control& u, double tmin,
                      StepCertificate cert) {
        TrajectoryStep st;
        st.t = t;
        st.z = z;
        st.u = u;
        st.min_time = tmin;
        st.g = constraint ? (*constraint)(z, t) : -kInf;
        st.certificate = cert;
        traj.steps.push_back(st);
    };

    State4 z = z0;
    double tmin = interp_min_time(field, z);
    if (tmin == kInf) {
        traj.termination = TerminationReason::Infeasible;
        return traj;
    }
    if (tmin < params.eta) {
        traj.termination = TerminationReason::TargetReached;
        record(0.0, z, {}, tmin, StepCertificate::Certified);
        return traj;
    }

    int n = 0;
    while (n < params.max_steps && tmin >= params.eta) {
        double best_val = kInf;
        std::size_t best_k = 0;
        State4 best_z{};
        for (std::size_t k = 0; k < controls.size(); ++k) {
            const State4 cand = propagate(z, controls[k], params.h, params.substeps);
            const double val = interp_min_time(field, cand);
            if (val < best_val) {  // strict: ties keep the lowest control index
                best_val = val;
                best_k = k;
                best_z = cand;
            }
        }

        const double t_n = n * params.h;
        StepCertificate cert = StepCertificate::Certified;
        if (certification) {
            // Chain the guarantee across the Heun sub-steps: exact disjointness
            // at t_n, then the corner condition at every sub-step endpoint with
            // the sub-step as the certified time increment.
            const double hs = params.h / params.substeps;
            bool disjoint = true;
            for (const ObstacleSpec& o : certification->obstacles) {
                const Pose2 pose = motion_pose(o, t_n);
                const RectShape& r = std::get<RectShape>(o.shape);
                if (exact_rect_intersect({{z.x, z.y}, z.psi, certification->vehicle_half},
                                         {pose.pos, pose.yaw, {r.lx, r.ly}}))
                    disjoint = false;
            }
            State4 sub = z;
            for (int k = 0; k < params.substeps && cert == StepCertificate::Certified; ++k) {
                sub = heun_step(sub, controls[best_k], hs);
                const double t_sub = t_n + (k + 1) * hs;
                const bool corner_ok = corner_condition(
                    {{sub.x, sub.y}, sub.psi, certification->vehicle_half},
                    certification->obstacles, t_sub);
                cert = certify_step(disjoint, corner_ok, hs, certification->bound);
                disjoint = cert == StepCertificate::Certified;
            }
        }
        record(t_n, z, controls[best_k], tmin, cert);

        if (best_val == kInf) {
            traj.termination = TerminationReason::Infeasible;
            return traj;
        }
        z = best_z;
        tmin = best_val;
        ++n;
    }
    record(n * params.h, z, {}, tmin, StepCertificate::Certified);
    traj.termination = tmin < params.eta ? TerminationReason::TargetReached
                                         : TerminationReason::MaxIterations;
    return traj;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os) {
    os << "n,t,x,y,psi,v,a,w,Tmin,g,certified\n";
    os.precision(12);
    for (std::size_t n = 0; n < trajectory.steps.size(); ++n) {
        const TrajectoryStep& s = trajectory.steps[n];
        os << n << "," << s.t << "," << s.z.x << "," << s.z.y << "," << s.z.psi << "," << s.z.v
           << "," << s.u.a << "," << s.u.w << ",";
        if (s.min_time == kInf)
            os << "inf";
        else
            os << s.min_time;
        os << "," << s.g << ","
           << (s.certificate == StepCertificate::Certified ? "yes" : to_string(s.certificate))
           << "\n";
    }
    os << "# termination: " << to_string(trajectory.termination) << "\n";
}

void write_min_time_csv(const MinimalTimeField& field, std::ostream& os) {
    ScalarField tmp;
    tmp.grid = field.grid;
    tmp.values = field.times;
    write_csv(tmp, os);
}

}  // namespace hjreach
