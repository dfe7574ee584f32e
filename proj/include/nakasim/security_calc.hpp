#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nakasim {

double p_good(double beta, double rho, std::int64_t nu);
double p_good_limit(double beta, double lambda, double delta_h, double c_tilde, double capacity);
double p_pp(double p_good);
inline double eps_good(double p_good) { return p_good - 0.5; }
inline double alpha_x(double eps) { return 2.0 * eps * eps; }
inline double alpha_p(double p_pp) { return 2.0 * p_pp * p_pp; }

double hoeffding_tail_x(double eps_good, double delta, double n);
double pp_tail(double k1, double k2, double delta, double k_horizon, double p_pp, double alpha_x, double alpha_p);
bool cp_condition(double c_tilde, double p_good);
double beta_threshold(double lambda_grwth, double lambda_hon);
double index_time_tail(double k, double delta);

struct Liveness {
    double simple = 0.0;   // slots
    double refined = 0.0;  // slots
};
// lambda in blocks per second, t_tput in slots.
Liveness liveness_latency(double k_cp, double rho, double lambda, double tau, double delta, double t_tput);

class Insecure : public std::runtime_error {
public:
    explicit Insecure(double beta);
    double beta;
};

// Objective of the region optimisation at one c_tilde.
double region_objective(double beta, double capacity, double delta_h, double c_tilde);

struct RatePoint {
    double lambda_max = 0.0;
    double c_tilde = 0.0;
};

// Throws Insecure when no c_tilde in [1, 1e5] gives a positive rate.
RatePoint max_rate(double beta, double capacity, double delta_h);
// Plain fine grid over c_tilde, the independent reference for max_rate.
RatePoint max_rate_grid(double beta, double capacity, double delta_h, double step);

// The p_good at which (2p-1)^2/p = 16/c_tilde (upper root).
double cp_boundary_p(double c_tilde);

struct RegionRow {
    double beta = 0.0;
    double lambda_max = 0.0;
    double c_tilde = 0.0;
    bool secure = false;
    std::string model;
};

std::vector<RegionRow> region_curve(const std::vector<double>& betas, double capacity, double delta_h);
// Bounded-delay reference with delta = 1/C (not derived from the formulas above).
std::vector<RegionRow> bounded_delay_reference(const std::vector<double>& betas, double capacity);

// Smallest K1*K2 with pp_tail below `target`; K2 is scanned, K1 follows from
// balancing the second term.
struct KcpChoice {
    std::int64_t k1 = 0, k2 = 0;
    std::int64_t k_cp = 0;
    double bound = 1.0;
};
std::optional<KcpChoice> choose_kcp(double p_good, double delta, double k_horizon, double target);

}  // namespace nakasim
