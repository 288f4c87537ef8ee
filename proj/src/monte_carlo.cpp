#include "relayarq/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace relayarq {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) {
    key0_ = static_cast<std::uint32_t>(seed);
    key1_ = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
}

void Philox4x32::refill() {
    std::uint32_t x0 = ctr_[0], x1 = ctr_[1], x2 = ctr_[2], x3 = ctr_[3];
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(0xD2511F53u, x0, hi0, lo0);
        mulhilo(0xCD9E8D57u, x2, hi1, lo1);
        const std::uint32_t y0 = hi1 ^ x1 ^ k0;
        const std::uint32_t y1 = lo1;
        const std::uint32_t y2 = hi0 ^ x3 ^ k1;
        const std::uint32_t y3 = lo0;
        x0 = y0; x1 = y1; x2 = y2; x3 = y3;
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    out_[0] = x0; out_[1] = x1; out_[2] = x2; out_[3] = x3;
    if (++ctr_[0] == 0) ++ctr_[1];  // 64-bit block counter within the stream
    idx_ = 0;
}

std::uint32_t Philox4x32::next_u32() {
    if (idx_ >= 4) refill();
    return out_[idx_++];
}

double Philox4x32::u01() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
    double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    return antithetic_ ? 1.0 - u : u;
}

double Philox4x32::exponential(double lambda) {
    if (std::isinf(lambda)) return 0.0;
    return -std::log(u01()) / lambda;
}

void Philox4x32::normal_pair(double& z0, double& z1) {
    const double r = std::sqrt(-2.0 * std::log(u01()));
    const double phi = kTwoPi * u01();
    z0 = r * std::cos(phi);
    z1 = r * std::sin(phi);
}

std::complex<double> Philox4x32::cgauss(double lambda) {
    if (std::isinf(lambda)) return {0.0, 0.0};
    double z0, z1;
    normal_pair(z0, z1);
    const double s = std::sqrt(0.5 / lambda);
    return {s * z0, s * z1};
}

FadingSample sample_fading(const ChannelParams& ch, Philox4x32& rng) {
    FadingSample f;
    f.h_sr = rng.cgauss(ch.lambda_sr);
    if (ch.delta > 0.0) {
        const std::complex<double> varsigma = rng.cgauss(ch.lambda_sd);
        f.h_sd = ch.delta * f.h_sr + std::sqrt(1.0 - ch.delta * ch.delta) * varsigma;
    } else {
        f.h_sd = rng.cgauss(ch.lambda_sd);
    }
    f.h_rd = rng.cgauss(ch.lambda_rd);
    return f;
}

namespace {

struct PacketOutcome {
    bool decoded = false;
    int decode_round = 0;      // A_m
    int source_stop = 0;       // S_m: last round the source transmitted
    int relay_first = 0;       // n of B_{n,m}: round the relay decoded
    int relay_last = 0;        // m of B_{n,m}: last round the relay transmitted
    double t_s = 0.0, t_r = 0.0, t_tot = 0.0;  // channel uses, in units of Q
    double xi_s = 0.0, xi_r = 0.0;             // energies, in units of Q
};

struct Tallies {
    std::uint64_t n = 0;
    double sum_q = 0.0;
    // ratio pairs: (Y, X) sums plus second moments for the delta method
    double st = 0.0, st2 = 0.0, sqt = 0.0;                      // throughput: Y=q, X=t_tot
    double sxs = 0.0, sts = 0.0, sxs2 = 0.0, sts2 = 0.0, sxsts = 0.0;   // phi_s
    double sxr = 0.0, str = 0.0, sxr2 = 0.0, str2 = 0.0, sxrtr = 0.0;   // phi_r
    double sxt = 0.0, sxt2 = 0.0, sxtt = 0.0;                   // phi_total: Y=xi_s+xi_r
    std::vector<double> cnt_a, cnt_s;
    std::map<std::pair<int, int>, double> cnt_b;

    void add(const PacketOutcome& o) {
        ++n;
        const double q = o.decoded ? 1.0 : 0.0;
        sum_q += q;
        st += o.t_tot; st2 += o.t_tot * o.t_tot; sqt += q * o.t_tot;
        sxs += o.xi_s; sts += o.t_s;
        sxs2 += o.xi_s * o.xi_s; sts2 += o.t_s * o.t_s; sxsts += o.xi_s * o.t_s;
        sxr += o.xi_r; str += o.t_r;
        sxr2 += o.xi_r * o.xi_r; str2 += o.t_r * o.t_r; sxrtr += o.xi_r * o.t_r;
        const double xt = o.xi_s + o.xi_r;
        sxt += xt; sxt2 += xt * xt; sxtt += xt * o.t_tot;
        if (o.decoded) cnt_a[o.decode_round - 1] += 1.0;
        cnt_s[o.source_stop - 1] += 1.0;
        if (o.relay_last > o.relay_first) cnt_b[{o.relay_first, o.relay_last}] += 1.0;
    }

    void merge(const Tallies& t) {
        n += t.n; sum_q += t.sum_q;
        st += t.st; st2 += t.st2; sqt += t.sqt;
        sxs += t.sxs; sts += t.sts; sxs2 += t.sxs2; sts2 += t.sts2; sxsts += t.sxsts;
        sxr += t.sxr; str += t.str; sxr2 += t.sxr2; str2 += t.str2; sxrtr += t.sxrtr;
        sxt += t.sxt; sxt2 += t.sxt2; sxtt += t.sxtt;
        for (std::size_t i = 0; i < cnt_a.size(); ++i) {
            cnt_a[i] += t.cnt_a[i];
            cnt_s[i] += t.cnt_s[i];
        }
        for (const auto& [nm, c] : t.cnt_b) cnt_b[nm] += c;
    }
};

// Standard error of the ratio estimator sum(Y)/sum(X) by the delta method.
double ratio_se(std::uint64_t n, double sy, double sx, double sy2, double sx2, double sxy) {
    if (n < 2 || sx <= 0.0) return 0.0;
    const double nn = static_cast<double>(n);
    const double ybar = sy / nn, xbar = sx / nn;
    const double r = ybar / xbar;
    const double vy = (sy2 - nn * ybar * ybar) / (nn - 1.0);
    const double vx = (sx2 - nn * xbar * xbar) / (nn - 1.0);
    const double cxy = (sxy - nn * xbar * ybar) / (nn - 1.0);
    const double var = (vy - 2.0 * r * cxy + r * r * vx) / (nn * xbar * xbar);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

class PacketSimulator {
public:
    PacketSimulator(const ChannelParams& ch, const ProtocolConfig& cfg,
                    const PowerAllocation& pw, const FeedbackNoise& fb)
        : ch_(ch), cfg_(cfg), pw_(pw), fb_(fb), rounds_(cfg.rounds()) {
        rtd_ = cfg.protocol == Protocol::Rtd;
        snr_threshold_ = std::expm1(cfg.rates[0]);
        weights_.resize(rounds_ + 1);
        for (int i = 1; i <= rounds_; ++i) weights_[i] = cfg.weight(i);
    }

    PacketOutcome run(Philox4x32& rng) const {
        PacketOutcome o;
        FadingSample block;
        if (ch_.fading == FadingMode::QuasiStatic) block = sample_fading(ch_, rng);

        double relay_acc = 0.0, dest_acc = 0.0;
        bool relay_decoded = false;
        bool src_on = true, relay_on = false;  // transmitting next round
        for (int m = 1; m <= rounds_; ++m) {
            if (!src_on && !relay_on) break;
            if (ch_.fading == FadingMode::FastFading) block = sample_fading(ch_, rng);
            const double w = weights_[m];
            const double ps = pw_.p_source[m - 1];
            const double pr = pw_.p_relay[m - 1];

            if (src_on && relay_on) {
                // Feedback-error path: both retransmit. RTD combines the two
                // fields coherently; INR sums the per-link mutual informations.
                if (rtd_) {
                    const std::complex<double> amp =
                        block.h_sd * std::sqrt(ps) + block.h_rd * std::sqrt(pr);
                    dest_acc += std::norm(amp);
                } else {
                    dest_acc += w * (std::log1p(block.g_sd() * ps) +
                                     std::log1p(block.g_rd() * pr));
                }
                o.xi_s += ps * w;
                o.xi_r += pr * w;
                o.t_s += w;
                o.t_r += w;
                o.source_stop = m;
                o.relay_last = m;
            } else if (src_on) {
                if (rtd_) {
                    dest_acc += block.g_sd() * ps;
                    if (!relay_decoded) relay_acc += block.g_sr() * ps;
                } else {
                    dest_acc += w * std::log1p(block.g_sd() * ps);
                    if (!relay_decoded) relay_acc += w * std::log1p(block.g_sr() * ps);
                }
                o.xi_s += ps * w;
                o.t_s += w;
                o.source_stop = m;
            } else {
                if (rtd_)
                    dest_acc += block.g_rd() * pr;
                else
                    dest_acc += w * std::log1p(block.g_rd() * pr);
                o.xi_r += pr * w;
                o.t_r += w;
                o.relay_last = m;
            }
            o.t_tot += w;

            // Destination checked before relay handover within a round.
            const bool dest_now = !o.decoded && dest_acc >= decode_target(m);
            if (dest_now) {
                o.decoded = true;
                o.decode_round = m;
            }
            if (!relay_decoded && src_on && relay_acc >= decode_target(m)) {
                relay_decoded = true;
                if (!o.decoded && o.relay_first == 0) o.relay_first = m;
            }
            if (m == rounds_) break;

            // Per-round feedback bits, each flipped independently.
            const bool src_sees_dest_ack = o.decoded != flip(rng, fb_.p_sd);
            const bool relay_sees_dest_ack = o.decoded != flip(rng, fb_.p_rd);
            const bool relay_claims = relay_decoded && !relay_sees_dest_ack;
            const bool src_sees_relay_ack =
                relay_claims != (relay_sees_dest_ack ? false : flip(rng, fb_.p_sr));
            if (src_on && (src_sees_dest_ack || src_sees_relay_ack)) src_on = false;
            relay_on = relay_claims;
        }
        if (o.relay_first == 0 || o.relay_last <= o.relay_first) {
            o.relay_first = 0;
            o.relay_last = 0;  // relay never transmitted
        }
        if (o.source_stop == 0) o.source_stop = 1;
        return o;
    }

private:
    double decode_target(int) const { return rtd_ ? snr_threshold_ : 1.0; }

    static bool flip(Philox4x32& rng, double p) { return p > 0.0 && rng.u01() < p; }

    const ChannelParams& ch_;
    const ProtocolConfig& cfg_;
    const PowerAllocation& pw_;
    const FeedbackNoise& fb_;
    int rounds_;
    bool rtd_;
    double snr_threshold_;
    std::vector<double> weights_;
};

}  // namespace

McResult simulate(const ChannelParams& ch, const ProtocolConfig& cfg,
                  const PowerAllocation& pw, const FeedbackNoise& fb, const McConfig& mc) {
    ch.validate();
    cfg.validate();
    pw.validate(cfg.rounds());
    fb.validate();
    if (mc.n_packets < 1) throw ConfigError("mc: n_packets must be >= 1");
    if (cfg.protocol == Protocol::Inr && ch.fading == FadingMode::FastFading &&
        cfg.coding != Coding::FixedLength)
        throw ConfigError("mc: fast-fading INR requires fixed-length coding");

    const PacketSimulator sim(ch, cfg, pw, fb);
    const int rounds = cfg.rounds();

    constexpr std::uint64_t kChunk = 1 << 16;
    const std::uint64_t n_chunks = (mc.n_packets + kChunk - 1) / kChunk;
    std::vector<Tallies> partial(n_chunks);

    auto run_chunk = [&](std::uint64_t c) {
        Tallies t;
        t.cnt_a.assign(rounds, 0.0);
        t.cnt_s.assign(rounds, 0.0);
        const std::uint64_t lo = c * kChunk;
        const std::uint64_t hi = std::min(mc.n_packets, lo + kChunk);
        for (std::uint64_t p = lo; p < hi; ++p) {
            const std::uint64_t stream = mc.antithetic ? p / 2 : p;
            Philox4x32 rng(mc.seed, stream);
            rng.set_antithetic(mc.antithetic && (p % 2 == 1));
            t.add(sim.run(rng));
        }
        partial[c] = std::move(t);
    };

    const int threads = std::max(1, mc.threads);
    if (threads == 1 || n_chunks == 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= n_chunks) return;
                    run_chunk(c);
                }
            });
        for (auto& th : pool) th.join();
    }

    Tallies all;
    all.cnt_a.assign(rounds, 0.0);
    all.cnt_s.assign(rounds, 0.0);
    for (const auto& t : partial) all.merge(t);  // fixed chunk order: deterministic

    const double nn = static_cast<double>(all.n);
    McResult res;
    res.n_packets = all.n;
    res.metrics.outage = 1.0 - all.sum_q / nn;
    res.metrics.throughput = all.st > 0.0 ? all.sum_q / all.st : 0.0;
    res.metrics.phi_s = all.sts > 0.0 ? all.sxs / all.sts : 0.0;
    res.metrics.relay_ever_active = all.str > 0.0;
    res.metrics.phi_r = all.str > 0.0 ? all.sxr / all.str : 0.0;
    res.metrics.phi_total = all.st > 0.0 ? all.sxt / all.st : 0.0;

    const double p_out = res.metrics.outage;
    res.std_errors.outage = std::sqrt(std::max(0.0, p_out * (1.0 - p_out) / nn));
    res.std_errors.throughput =
        ratio_se(all.n, all.sum_q, all.st, all.sum_q /*q^2=q*/, all.st2, all.sqt);
    res.std_errors.phi_s = ratio_se(all.n, all.sxs, all.sts, all.sxs2, all.sts2, all.sxsts);
    res.std_errors.phi_r = ratio_se(all.n, all.sxr, all.str, all.sxr2, all.str2, all.sxrtr);
    res.std_errors.phi_total = ratio_se(all.n, all.sxt, all.st, all.sxt2, all.st2, all.sxtt);

    res.event_freqs.a.resize(rounds);
    res.event_freqs.s.resize(rounds);
    for (int m = 0; m < rounds; ++m) {
        res.event_freqs.a[m] = all.cnt_a[m] / nn;
        res.event_freqs.s[m] = all.cnt_s[m] / nn;
    }
    for (const auto& [nm, c] : all.cnt_b) res.event_freqs.b[nm] = c / nn;
    return res;
}

}  // namespace relayarq
