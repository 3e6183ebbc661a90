#pragma once

#include <map>
#include <string>
#include <vector>

#include "bcns/cns.hpp"

namespace bcns {

//
// A priori functionals along a trajectory, accumulated one snapshot at a time:
//   Y_p  : (a,u)^l in Lt~inf B^{d/2-1}_{2,1} and L1 B^{d/2+1}_{2,1},
//          a^h in Lt~inf B^{d/p+1}_{p,1} and L1 B^{d/p+1}_{p,1},
//          u^h in Lt~inf B^{d/p}_{p,1}   and L1 B^{d/p+2}_{p,1}
//   X_p  : same low part; a^h Lt~inf/L1 B^{d/p}; u^h Lt~inf B^{d/p-1}, L1 B^{d/p+1}
//   S    : Y_2 plus, per axis k, (x_k a, x_k u)^l Lt~inf B^{d/2}, L1 B^{d/2+2};
//          (x_k a)^h Lt~inf/L1 B^{d/2+1}; (x_k u)^h Lt~inf B^{d/2}, L1 B^{d/2+2}
//   D    : sup_s sup_t <t>^{(s0+s)/2} ||(a,u)||^l_{B^s_{2,1}}, s in [eps - s0, d/2 + 1]
//          + ||<t>^{d/p+1/2-eps} (grad a, u)||^h_{Lt~inf B^{d/p-1}_{p,1}} + ||t grad u||^h_{Lt~inf B^{d/p}_{p,1}}
// Pair norms are sums of the two members. Low = blocks j <= j0, high = j >= j0.
//

inline double s0_exponent(int d, double p) { return d * (2.0 / p - 0.5); }

struct DiagnosticsOptions {
  double p = 2.0;
  int j0 = 0;  // clamped into the resolved band
  double epsilon = 0.1;
  double s_step = 0.25;
  std::vector<int> axes;  // weighted axes for S; empty = all
  bool use_state_weights = false;  // take A_k, U_k from the state instead of x_k (a, u)
};

/// Value of every component at each pushed time; groups are Y, X, S, D.
struct DiagnosticsRecord {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;  // rows[n][c]
  std::vector<double> decay;               // instantaneous ||(a,u)||^l_{B^{d/2}_{2,1}} (d/p for the L^p target)
  double s0 = 0.0;
  std::map<std::string, double> initial;  // S0, Y0, X0, D0 and the B^{-d/2}_{2,inf} piece

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < names.size(); ++c)
      if (names[c] == name) return c;
    throw InvalidArgument("unknown diagnostics component " + name);
  }
  std::vector<double> series(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  /// Sum of the components whose name starts with "<group>.".
  std::vector<double> total(const std::string& group) const {
    std::vector<double> out(rows.size(), 0.0);
    for (std::size_t c = 0; c < names.size(); ++c)
      if (names[c].rfind(group + ".", 0) == 0)
        for (std::size_t n = 0; n < rows.size(); ++n) out[n] += rows[n][c];
    return out;
  }
};

class DiagnosticsAccumulator {
 public:
  DiagnosticsAccumulator(const GridSpec& g, DiagnosticsOptions opt)
      : g_(g), opt_(std::move(opt)), part_(DyadicPartition::clamped(g, opt_.j0)) {
    if (!(opt_.p >= 1.0)) throw InvalidArgument("Lebesgue exponent must be >= 1");
    if (!(opt_.epsilon > 0.0) || !(opt_.s_step > 0.0)) throw InvalidArgument("epsilon and lattice step must be positive");
    if (opt_.axes.empty())
      for (int k = 0; k < g.dim; ++k) opt_.axes.push_back(k);
    for (int k : opt_.axes) require(k >= 0 && k < g.dim, "weight axis out of range");
    rec_.s0 = s0_exponent(g.dim, opt_.p);
    for (double s = opt_.epsilon - rec_.s0; s < g.dim / 2.0 + 1.0 - 1e-12; s += opt_.s_step) s_lattice_.push_back(s);
    s_lattice_.push_back(g.dim / 2.0 + 1.0);
    build_queries();
  }

  const DyadicPartition& partition() const { return part_; }
  const DiagnosticsRecord& record() const { return rec_; }
  const std::vector<double>& s_lattice() const { return s_lattice_; }

  void push(const FluidState& s) {
    require_same_grid(s.a.grid(), g_);
    if (!rec_.times.empty() && !(s.t > rec_.times.back())) throw InvalidArgument("diagnostics times must increase");
    Snapshot snap = blocks_of(s);
    if (rec_.times.empty()) initial_norms(snap);
    for (Query& q : queries_) update(q, snap, s.t);
    std::vector<double> row;
    for (std::size_t ci = 0; ci < components_.size(); ++ci) {
      double v = 0.0;
      for (std::size_t qi : components_[ci].terms) v += value(queries_[qi]);
      row.push_back(ci == d_low_component_ ? d_low() : v);
    }
    rec_.times.push_back(s.t);
    rec_.names = names_;
    rec_.rows.push_back(std::move(row));
    rec_.decay.push_back(instant(snap.ch.at("a2"), g_.dim / 2.0, Window::low) +
                         instant(snap.ch.at("u2"), g_.dim / 2.0, Window::low));
    prev_ = std::move(snap);
    t_prev_ = s.t;
  }

 private:
  enum class Window { low, high, all };
  enum class Kind { tilde, l1, sup };
  enum class Weight { one, japanese, linear };

  struct Query {
    std::string channel;
    double s;
    Window win;
    Kind kind;
    Weight weight = Weight::one;
    double exponent = 0.0;
    std::vector<double> block_sup;  // tilde
    double acc = 0.0;               // l1 / sup
  };
  struct Component {
    std::string name;
    std::vector<std::size_t> terms;
  };
  struct Snapshot {
    std::map<std::string, std::vector<double>> ch;
  };

  bool in(Window w, int j) const {
    if (w == Window::low) return j <= part_.j0();
    if (w == Window::high) return j >= part_.j0();
    return true;
  }
  double instant(const std::vector<double>& b, double s, Window w) const {
    double v = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const int j = part_.j_min() + static_cast<int>(i);
      if (in(w, j)) v += std::pow(2.0, s * j) * b[i];
    }
    return v;
  }
  static double time_weight(const Query& q, double t) {
    switch (q.weight) {
      case Weight::one: return 1.0;
      case Weight::japanese: return std::pow(japanese(t), q.exponent);
      case Weight::linear: return t;
    }
    return 1.0;
  }

  std::size_t add_query(std::string ch, double s, Window w, Kind k, Weight wt = Weight::one, double e = 0.0) {
    queries_.push_back({std::move(ch), s, w, k, wt, e, {}, 0.0});
    return queries_.size() - 1;
  }
  void add_component(std::string name, std::vector<std::size_t> terms) {
    names_.push_back(name);
    components_.push_back({std::move(name), std::move(terms)});
  }

  void build_queries() {
    const int d = g_.dim;
    const double p = opt_.p, dp = d / p, h = d / 2.0;
    // X_p, Y_p low parts (L^2 based)
    auto low_pair = [&](const std::string& g, const std::string& a, const std::string& u, double s, Kind k) {
      add_component(g, {add_query(a, s, Window::low, k), add_query(u, s, Window::low, k)});
    };
    low_pair("Y.low_linf", "a2", "u2", h - 1.0, Kind::tilde);
    low_pair("Y.low_l1", "a2", "u2", h + 1.0, Kind::l1);
    add_component("Y.a_high_linf", {add_query("ap", dp + 1.0, Window::high, Kind::tilde)});
    add_component("Y.a_high_l1", {add_query("ap", dp + 1.0, Window::high, Kind::l1)});
    add_component("Y.u_high_linf", {add_query("up", dp, Window::high, Kind::tilde)});
    add_component("Y.u_high_l1", {add_query("up", dp + 2.0, Window::high, Kind::l1)});

    low_pair("X.low_linf", "a2", "u2", h - 1.0, Kind::tilde);
    low_pair("X.low_l1", "a2", "u2", h + 1.0, Kind::l1);
    add_component("X.a_high_linf", {add_query("ap", dp, Window::high, Kind::tilde)});
    add_component("X.a_high_l1", {add_query("ap", dp, Window::high, Kind::l1)});
    add_component("X.u_high_linf", {add_query("up", dp - 1.0, Window::high, Kind::tilde)});
    add_component("X.u_high_l1", {add_query("up", dp + 1.0, Window::high, Kind::l1)});

    // S: Y_2 plus weighted pieces
    low_pair("S.low_linf", "a2", "u2", h - 1.0, Kind::tilde);
    low_pair("S.low_l1", "a2", "u2", h + 1.0, Kind::l1);
    add_component("S.a_high_linf", {add_query("a2", h + 1.0, Window::high, Kind::tilde)});
    add_component("S.a_high_l1", {add_query("a2", h + 1.0, Window::high, Kind::l1)});
    add_component("S.u_high_linf", {add_query("u2", h, Window::high, Kind::tilde)});
    add_component("S.u_high_l1", {add_query("u2", h + 2.0, Window::high, Kind::l1)});
    for (int k : opt_.axes) {
      const std::string A = "A" + std::to_string(k), U = "U" + std::to_string(k), tag = "S.w" + std::to_string(k);
      add_component(tag + ".low_linf", {add_query(A, h, Window::low, Kind::tilde), add_query(U, h, Window::low, Kind::tilde)});
      add_component(tag + ".low_l1", {add_query(A, h + 2.0, Window::low, Kind::l1), add_query(U, h + 2.0, Window::low, Kind::l1)});
      add_component(tag + ".A_high_linf", {add_query(A, h + 1.0, Window::high, Kind::tilde)});
      add_component(tag + ".A_high_l1", {add_query(A, h + 1.0, Window::high, Kind::l1)});
      add_component(tag + ".U_high_linf", {add_query(U, h, Window::high, Kind::tilde)});
      add_component(tag + ".U_high_l1", {add_query(U, h + 2.0, Window::high, Kind::l1)});
    }

    // D: the low part is a sup over the s-lattice, handled as one component per s
    for (double s : s_lattice_) {
      const double e = 0.5 * (rec_.s0 + s);
      d_low_.push_back({add_query("a2", s, Window::low, Kind::sup, Weight::japanese, e),
                        add_query("u2", s, Window::low, Kind::sup, Weight::japanese, e)});
    }
    add_component("D.low", {});
    const double e = dp + 0.5 - opt_.epsilon;
    add_component("D.high", {add_query("grad_a", dp - 1.0, Window::high, Kind::tilde, Weight::japanese, e),
                             add_query("up", dp - 1.0, Window::high, Kind::tilde, Weight::japanese, e)});
    add_component("D.grad_u", {add_query("grad_u", dp, Window::high, Kind::tilde, Weight::linear)});
    d_low_component_ = components_.size() - 3;
  }

  Snapshot blocks_of(const FluidState& s) const {
    Snapshot out;
    const SpectralCoeffs Ah = forward_transform(s.a), Uh = forward_transform(s.u);
    out.ch["a2"] = block_norms(Ah, 2.0, part_);
    out.ch["u2"] = block_norms(Uh, 2.0, part_);
    out.ch["ap"] = opt_.p == 2.0 ? out.ch["a2"] : block_norms(Ah, opt_.p, part_);
    out.ch["up"] = opt_.p == 2.0 ? out.ch["u2"] : block_norms(Uh, opt_.p, part_);
    out.ch["grad_a"] = block_norms(gradient(Ah), opt_.p, part_);
    // grad u blocks: l^2 over rows of the row-wise norms (exact Frobenius for p = 2)
    std::vector<double> gu(part_.blocks(), 0.0);
    for (int c = 0; c < g_.dim; ++c) {
      const auto b = block_norms(gradient(Uh.component_coeffs(c)), opt_.p, part_);
      for (std::size_t i = 0; i < b.size(); ++i) gu[i] += b[i] * b[i];
    }
    for (double& v : gu) v = std::sqrt(v);
    out.ch["grad_u"] = std::move(gu);
    for (int k : opt_.axes) {
      RealField A, U;
      const WeightedPair* w = nullptr;
      if (opt_.use_state_weights)
        for (const auto& x : s.weighted)
          if (x.axis == k) w = &x;
      if (w) {
        A = w->A;
        U = w->U;
      } else {
        A = coordinate_weight(s.a, k, kInfinity).field;
        U = coordinate_weight(s.u, k, kInfinity).field;
      }
      out.ch["A" + std::to_string(k)] = block_norms(A, 2.0, part_);
      out.ch["U" + std::to_string(k)] = block_norms(U, 2.0, part_);
    }
    return out;
  }

  void update(Query& q, const Snapshot& snap, double t) {
    const auto& b = snap.ch.at(q.channel);
    const double w = time_weight(q, t);
    switch (q.kind) {
      case Kind::tilde:
        if (q.block_sup.empty()) q.block_sup.assign(b.size(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) q.block_sup[i] = std::max(q.block_sup[i], w * b[i]);
        break;
      case Kind::sup:
        q.acc = std::max(q.acc, w * instant(b, q.s, q.win));
        break;
      case Kind::l1:
        if (!rec_.times.empty()) {
          const double prev = time_weight(q, t_prev_) * instant(prev_.ch.at(q.channel), q.s, q.win);
          q.acc += 0.5 * (t - t_prev_) * (prev + w * instant(b, q.s, q.win));
        }
        break;
    }
  }

  double value(const Query& q) const {
    if (q.kind == Kind::tilde) return q.block_sup.empty() ? 0.0 : instant(q.block_sup, q.s, q.win);
    return q.acc;
  }

  void initial_norms(const Snapshot& s) {
    const int d = g_.dim;
    const double p = opt_.p, dp = d / p, h = d / 2.0;
    auto I = [&](const std::string& ch, double sv, Window w) { return instant(s.ch.at(ch), sv, w); };
    auto linf_norm = [&](const std::string& ch, double sv, Window w) {
      double m = 0.0;
      const auto& b = s.ch.at(ch);
      for (std::size_t i = 0; i < b.size(); ++i) {
        const int j = part_.j_min() + static_cast<int>(i);
        if (in(w, j)) m = std::max(m, std::pow(2.0, sv * j) * b[i]);
      }
      return m;
    };
    const double neg = linf_norm("a2", -h, Window::all) + linf_norm("u2", -h, Window::all);
    double S0 = I("a2", h - 1.0, Window::low) + I("u2", h - 1.0, Window::low) + I("a2", h + 1.0, Window::high) +
                I("u2", h, Window::high) + neg;
    for (int k : opt_.axes) {
      const std::string A = "A" + std::to_string(k), U = "U" + std::to_string(k);
      S0 += I(A, h, Window::low) + I(U, h, Window::low) + I(A, h + 1.0, Window::high) + I(U, h, Window::high);
    }
    rec_.initial["S0"] = S0;
    rec_.initial["neg_besov"] = neg;
    rec_.initial["Y0"] = I("a2", h - 1.0, Window::low) + I("u2", h - 1.0, Window::low) + I("ap", dp + 1.0, Window::high) +
                         I("up", dp, Window::high);
    rec_.initial["X0"] = I("a2", h - 1.0, Window::low) + I("u2", h - 1.0, Window::low) + I("ap", dp, Window::high) +
                         I("up", dp - 1.0, Window::high);
    rec_.initial["D0"] = linf_norm("a2", -rec_.s0, Window::low) + linf_norm("u2", -rec_.s0, Window::low) +
                         I("grad_a", dp - 1.0, Window::high) + I("up", dp - 1.0, Window::high);
  }

  // D.low is the sup over the lattice of the per-s weighted sups
  double d_low() const {
    double m = 0.0;
    for (const auto& pr : d_low_) m = std::max(m, queries_[pr[0]].acc + queries_[pr[1]].acc);
    return m;
  }

 public:
  /// Snapshot of the current totals by group (Y, X, S, D).
  double current(const std::string& group) const {
    if (rec_.rows.empty()) return 0.0;
    double v = 0.0;
    const auto& r = rec_.rows.back();
    for (std::size_t c = 0; c < names_.size(); ++c)
      if (names_[c].rfind(group + ".", 0) == 0) v += r[c];
    return v;
  }

 private:
  GridSpec g_;
  DiagnosticsOptions opt_;
  DyadicPartition part_;
  DiagnosticsRecord rec_;
  std::vector<double> s_lattice_;
  std::vector<Query> queries_;
  std::vector<Component> components_;
  std::vector<std::string> names_;
  std::vector<std::array<std::size_t, 2>> d_low_;
  std::size_t d_low_component_ = 0;
  Snapshot prev_;
  double t_prev_ = 0.0;
};

}  // namespace bcns
