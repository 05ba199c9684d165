#include "spinnet/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinnet {

namespace {

const cplx I(0, 1);

struct Segment {
    double t0, duration, rate;
    Vec3 axis;
    SU2 start;
};

Vec3 pulse_axis(const PulseSequence& seq)
{
    const double ph = seq.phase * pi / 180;
    return {std::cos(ph), std::sin(ph), 0};
}

// Pulse segment (possibly zero width) followed by free precession at the detuning.
std::vector<Segment> segments(const PulseSequence& seq)
{
    const double flip = seq.flip_angle * pi / 180;
    const double dw = hz_to_rad(seq.detuning);
    std::vector<Segment> out;
    SU2 start = SU2::Identity();
    if (seq.pulse_duration > 0) {
        const double w1 = flip / seq.pulse_duration;
        const double om = std::hypot(w1, dw);
        Vec3 n = om > 0 ? Vec3(w1 * pulse_axis(seq) + dw * Vec3::UnitZ()) / om : Vec3(Vec3::UnitZ());
        out.push_back({0, seq.pulse_duration, om, n, start});
        start = su2_rotation(n, om * seq.pulse_duration);
    } else if (flip != 0) {
        start = su2_rotation(pulse_axis(seq), flip);
    }
    if (seq.interpulse_delay > 0)
        out.push_back({seq.pulse_duration, seq.interpulse_delay, dw, Vec3::UnitZ(), start});
    return out;
}

SU2 evolve(const Segment& s, double dt) { return su2_rotation(s.axis, s.rate * dt) * s.start; }

Vec3 euler_zyz(const SO3& R)
{
    const double b = std::acos(std::clamp(R(2, 2), -1.0, 1.0));
    double a, g;
    if (std::sin(b) > 1e-12) {
        a = std::atan2(R(1, 2), R(0, 2));
        g = std::atan2(R(2, 1), -R(2, 0));
    } else {
        // Gimbal lock: only alpha + gamma (or alpha - gamma) is defined.
        a = std::atan2(R(1, 0), R(0, 0));
        g = 0;
    }
    return {a, b, g};
}

double factorial(int n)
{
    double f = 1;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

} // namespace

void PulseSequence::validate() const
{
    if (pulse_duration < 0 || interpulse_delay < 0)
        throw std::invalid_argument("sequence: durations must be non-negative");
    if (!(period() > 0))
        throw std::invalid_argument("sequence: period must be positive");
}

SU2 su2_rotation(const Vec3& axis, double angle)
{
    const Vec3 n = axis.normalized();
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    SU2 u;
    u(0, 0) = cplx(c, -s * n.z());
    u(0, 1) = cplx(-s * n.y(), -s * n.x());
    u(1, 0) = cplx(s * n.y(), -s * n.x());
    u(1, 1) = cplx(c, s * n.z());
    return u;
}

SO3 so3_of(const SU2& u)
{
    static const SU2 S[3] = {(SU2() << 0, 0.5, 0.5, 0).finished(), (SU2() << 0, -0.5 * I, 0.5 * I, 0).finished(),
                             (SU2() << 0.5, 0, 0, -0.5).finished()};
    SO3 R;
    const SU2 ud = u.adjoint();
    for (int b = 0; b < 3; ++b) {
        const SU2 m = u * S[b] * ud;
        for (int a = 0; a < 3; ++a)
            R(a, b) = 2.0 * (S[a] * m).trace().real();
    }
    return R;
}

SU2 drive_propagator(const PulseSequence& seq, double t)
{
    seq.validate();
    const auto segs = segments(seq);
    if (t <= 0)
        return SU2::Identity();
    for (const auto& s : segs)
        if (t <= s.t0 + s.duration)
            return evolve(s, t - s.t0);
    const auto& last = segs.back();
    return evolve(last, last.duration);
}

EffectiveFrame period_propagator(const PulseSequence& seq)
{
    seq.validate();
    EffectiveFrame f;
    f.period = seq.period();
    f.omega_d = 2 * pi / f.period;
    SU2 u = drive_propagator(seq, f.period);
    double a0 = u.trace().real() / 2;
    if (a0 < 0) {
        u = -u;
        a0 = -a0;
    }
    // u = cos(chi/2) - i sin(chi/2) n.sigma
    const Vec3 v(-(u(0, 1) + u(1, 0)).imag() / 2, (u(1, 0) - u(0, 1)).real() / 2, -(u(0, 0) - u(1, 1)).imag() / 2);
    const double s = v.norm();
    if (s < 1e-14) {
        f.degenerate = true;
        return f;
    }
    const double chi = 2 * std::atan2(s, a0);
    f.omega_eff = chi / f.period;
    f.axis = v / s;
    f.theta_eff = std::acos(std::clamp(f.axis.z(), -1.0, 1.0));
    f.phi_eff = std::atan2(f.axis.y(), f.axis.x());
    return f;
}

MicromotionPath micromotion(const PulseSequence& seq, int n_steps)
{
    if (n_steps < 32)
        throw std::invalid_argument("micromotion: n_steps must be >= 32");
    const EffectiveFrame f = period_propagator(seq);
    const auto segs = segments(seq);
    MicromotionPath path;
    double prev_alpha = 0;
    bool first = true;
    for (const auto& s : segs) {
        int n = static_cast<int>(std::lround(n_steps * s.duration / f.period));
        n = std::max(2, n + (n % 2));
        const double h = s.duration / n;
        for (int i = 0; i <= n; ++i) {
            const double t = s.t0 + i * h;
            const SU2 P = evolve(s, i * h) * su2_rotation(f.axis, -f.omega_eff * t);
            const SO3 Rd = so3_of(P).transpose();
            Vec3 e = euler_zyz(Rd);
            if (!first) {
                while (e[0] - prev_alpha > pi)
                    e[0] -= 2 * pi;
                while (e[0] - prev_alpha < -pi)
                    e[0] += 2 * pi;
            }
            prev_alpha = e[0];
            first = false;
            const double w = (i == 0 || i == n) ? h / 3 : (i % 2 ? 4 * h / 3 : 2 * h / 3);
            path.t.push_back(t);
            path.weight.push_back(w);
            path.P.push_back(P);
            path.euler.push_back(e);
        }
    }
    return path;
}

double wigner_d(int l, int m, int n, double beta)
{
    if (l < 0 || std::abs(m) > l || std::abs(n) > l)
        throw std::invalid_argument("wigner_d: invalid indices");
    const double c = std::cos(beta / 2), s = std::sin(beta / 2);
    const double pre = std::sqrt(factorial(l + m) * factorial(l - m) * factorial(l + n) * factorial(l - n));
    double sum = 0;
    for (int k = std::max(0, n - m); k <= std::min(l + n, l - m); ++k) {
        const double den = factorial(l + n - k) * factorial(k) * factorial(m - n + k) * factorial(l - m - k);
        const double sign = ((m - n + k) % 2) ? -1.0 : 1.0;
        sum += sign * std::pow(c, 2 * l + n - m - 2 * k) * std::pow(s, m - n + 2 * k) / den;
    }
    return pre * sum;
}

cplx wigner_D(int l, int m, int n, double alpha, double beta, double gamma)
{
    return std::exp(-I * double(m) * alpha) * wigner_d(l, m, n, beta) * std::exp(-I * double(n) * gamma);
}

cplx averaged_D(const MicromotionPath& path, double period, int l, int m, int k)
{
    const double wd = 2 * pi / period;
    cplx acc = 0;
    for (std::size_t i = 0; i < path.t.size(); ++i) {
        const Vec3& e = path.euler[i];
        acc += path.weight[i] * wigner_D(l, m, 0, e[0], e[1], e[2]) * std::exp(-I * double(k) * wd * path.t[i]);
    }
    return acc / period;
}

namespace {

// D^l_{m0}[P^dag(t_i)] for m = -l..l, one row per node.
Eigen::MatrixXcd node_D(const MicromotionPath& path, int l)
{
    Eigen::MatrixXcd D(path.t.size(), 2 * l + 1);
    for (std::size_t i = 0; i < path.t.size(); ++i)
        for (int m = -l; m <= l; ++m)
            D(i, m + l) = wigner_D(l, m, 0, path.euler[i][0], path.euler[i][1], path.euler[i][2]);
    return D;
}

// sum_m d^l_{qm}(-theta) e^{i m phi} D^l_{m0}[P^dag(t_i)]: the micromotion seen from the
// effective-axis frame, evaluated per node.
Eigen::VectorXcd axis_frame_signal(const Eigen::MatrixXcd& D, const EffectiveFrame& f, int l, int q)
{
    Eigen::VectorXcd coef(2 * l + 1);
    for (int m = -l; m <= l; ++m)
        coef[m + l] = wigner_d(l, q, m, -f.theta_eff) * std::exp(I * double(m) * f.phi_eff);
    return D * coef;
}

cplx fourier_average(const MicromotionPath& path, const Eigen::VectorXcd& signal, double period, int k)
{
    const double wd = 2 * pi / period;
    cplx acc = 0;
    for (std::size_t i = 0; i < path.t.size(); ++i)
        acc += path.weight[i] * signal[i] * std::exp(-I * double(k) * wd * path.t[i]);
    return acc / period;
}

std::vector<cplx> comb(const MicromotionPath& path, const EffectiveFrame& f, int q, int K)
{
    const Eigen::VectorXcd sig = axis_frame_signal(node_D(path, 1), f, 1, q);
    std::vector<cplx> c(2 * K + 1);
    for (int k = -K; k <= K; ++k)
        c[k + K] = fourier_average(path, sig, f.period, k);
    return c;
}

double kappa_at(const PulseSequence& seq, const EffectiveFrame& f, int n_steps)
{
    const MicromotionPath path = micromotion(seq, n_steps);
    const cplx k = fourier_average(path, axis_frame_signal(node_D(path, 2), f, 2, 0), f.period, 0);
    if (std::abs(k.imag()) > 1e-6)
        throw std::runtime_error("kappa: imaginary residue above tolerance");
    return k.real();
}

} // namespace

double kappa(const PulseSequence& seq, int n_steps)
{
    const EffectiveFrame f = period_propagator(seq);
    const double k1 = kappa_at(seq, f, n_steps);
    const double k2 = kappa_at(seq, f, 2 * n_steps);
    if (std::abs(k1 - k2) > 1e-4)
        throw std::runtime_error("kappa: quadrature not converged");
    return k2;
}

std::vector<cplx> fourier_coeffs(const PulseSequence& seq, int q, int K, int n_steps)
{
    if (K < 1)
        throw std::invalid_argument("fourier_coeffs: K must be >= 1");
    if (std::abs(q) > 1)
        throw std::invalid_argument("fourier_coeffs: q must be -1, 0 or +1");
    const EffectiveFrame f = period_propagator(seq);
    return comb(micromotion(seq, n_steps), f, q, K);
}

double FloquetParams::comb_weight() const
{
    double s = 0;
    for (const auto& v : c_plus)
        s += std::norm(v);
    return s;
}

FloquetParams floquet_params(const PulseSequence& seq, int K, int n_steps)
{
    FloquetParams p;
    p.frame = period_propagator(seq);
    p.kappa = kappa(seq, n_steps);
    p.K = K;
    const MicromotionPath path = micromotion(seq, n_steps);
    p.c_plus = comb(path, p.frame, 1, K);
    p.c_zero = comb(path, p.frame, 0, K);
    p.c_minus = comb(path, p.frame, -1, K);
    return p;
}

std::vector<CombTooth> filter_function(const std::vector<cplx>& c, double omega_d)
{
    const int K = static_cast<int>(c.size() / 2);
    std::vector<CombTooth> y;
    for (int k = -K; k <= K; ++k)
        y.push_back({-k * omega_d, std::norm(c[k + K])});
    return y;
}

} // namespace spinnet
