#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace ppinn::ad {

class Tape;

// Handle to a scalar on a reverse tape. Arithmetic records operations with
// their local partial derivatives evaluated immediately, so backward() is a
// single reverse sweep with no re-evaluation.
struct Rev {
  Tape* tape = nullptr;
  int32_t i = -1;
};

class Tape {
 public:
  Rev leaf(double v) {
    val_.push_back(v);
    adj_.push_back(0.0);
    return {this, static_cast<int32_t>(val_.size() - 1)};
  }

  double value(Rev x) const { return val_[x.i]; }
  double adjoint(Rev x) const { return adj_[x.i]; }
  void add_adjoint(int32_t i, double w) { adj_[i] += w; }

  Rev record(double v, int32_t a, double pa, int32_t b, double pb) {
    Rev out = leaf(v);
    ops_.push_back({out.i, a, b, pa, pb});
    return out;
  }
  Rev record(double v, int32_t a, double pa) { return record(v, a, pa, -1, 0.0); }

  // Registers a callback run at its recorded position during the reverse
  // sweep; used for batched network calls whose pullback is a dense
  // layer-wise pass rather than scalar tape ops.
  void push_pullback(std::function<void(Tape&)> pb) {
    const int32_t idx = static_cast<int32_t>(pullbacks_.size());
    pullbacks_.push_back(std::move(pb));
    ops_.push_back({-1, kCustom, idx, 0.0, 0.0});
  }

  // Seeds d(output)/d(output) = 1 and propagates adjoints to all leaves.
  void backward(Rev output) {
    adj_[output.i] = 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      if (it->a == kCustom) {
        pullbacks_[it->b](*this);
        continue;
      }
      const double w = adj_[it->out];
      if (w == 0.0) continue;
      adj_[it->a] += it->pa * w;
      if (it->b >= 0) adj_[it->b] += it->pb * w;
    }
  }

  void clear() {
    val_.clear();
    adj_.clear();
    ops_.clear();
    pullbacks_.clear();
  }

  std::size_t size() const { return val_.size(); }

 private:
  static constexpr int32_t kCustom = -2;
  struct OpRec {
    int32_t out, a, b;
    double pa, pb;
  };
  std::vector<double> val_, adj_;
  std::vector<OpRec> ops_;
  std::vector<std::function<void(Tape&)>> pullbacks_;
};

inline double val(Rev x) { return x.tape->value(x); }

inline Rev operator+(Rev a, Rev b) {
  return a.tape->record(val(a) + val(b), a.i, 1.0, b.i, 1.0);
}
inline Rev operator+(Rev a, double c) {
  return a.tape->record(val(a) + c, a.i, 1.0);
}
inline Rev operator+(double c, Rev a) { return a + c; }

inline Rev operator-(Rev a, Rev b) {
  return a.tape->record(val(a) - val(b), a.i, 1.0, b.i, -1.0);
}
inline Rev operator-(Rev a, double c) { return a + (-c); }
inline Rev operator-(double c, Rev a) {
  return a.tape->record(c - val(a), a.i, -1.0);
}
inline Rev operator-(Rev a) { return a.tape->record(-val(a), a.i, -1.0); }

inline Rev operator*(Rev a, Rev b) {
  return a.tape->record(val(a) * val(b), a.i, val(b), b.i, val(a));
}
inline Rev operator*(Rev a, double c) {
  return a.tape->record(val(a) * c, a.i, c);
}
inline Rev operator*(double c, Rev a) { return a * c; }

inline Rev operator/(Rev a, Rev b) {
  const double ib = 1.0 / val(b);
  return a.tape->record(val(a) * ib, a.i, ib, b.i, -val(a) * ib * ib);
}
inline Rev operator/(Rev a, double c) { return a * (1.0 / c); }
inline Rev operator/(double c, Rev a) {
  const double ia = 1.0 / val(a);
  return a.tape->record(c * ia, a.i, -c * ia * ia);
}

inline Rev& operator+=(Rev& a, Rev b) { return a = a + b; }
inline Rev& operator-=(Rev& a, Rev b) { return a = a - b; }

inline Rev square(Rev a) {
  return a.tape->record(val(a) * val(a), a.i, 2.0 * val(a));
}
inline Rev tanh(Rev a) {
  const double t = std::tanh(val(a));
  return a.tape->record(t, a.i, 1.0 - t * t);
}
inline Rev exp(Rev a) {
  const double e = std::exp(val(a));
  return a.tape->record(e, a.i, e);
}
inline Rev log(Rev a) {
  return a.tape->record(std::log(val(a)), a.i, 1.0 / val(a));
}
inline Rev sin(Rev a) {
  return a.tape->record(std::sin(val(a)), a.i, std::cos(val(a)));
}
inline Rev cos(Rev a) {
  return a.tape->record(std::cos(val(a)), a.i, -std::sin(val(a)));
}
inline Rev sqrt(Rev a) {
  const double s = std::sqrt(val(a));
  return a.tape->record(s, a.i, 0.5 / s);
}

// log(sigmoid(x)) computed without overflow for large |x|;
// d/dx log σ(x) = σ(-x).
inline double log_sigmoid_value(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}
inline double sigmoid_value(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}
inline Rev log_sigmoid(Rev a) {
  return a.tape->record(log_sigmoid_value(val(a)), a.i, sigmoid_value(-val(a)));
}

}  // namespace ppinn::ad
