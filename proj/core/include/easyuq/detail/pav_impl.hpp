#ifndef EASYUQ_DETAIL_PAV_IMPL_HPP
#define EASYUQ_DETAIL_PAV_IMPL_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace easyuq::detail {

struct PavWorkspace {
  std::vector<double> sum_wv;   // per block: sum of w*v
  std::vector<double> sum_w;    // per block: sum of w
  std::vector<std::size_t> len; // per block: number of pooled inputs
};

// Pool-adjacent-violators sweep for a nonincreasing fit.  Maintains a
// stack of blocks (weighted sums, not running means) and merges while the
// left block mean is strictly below the right block mean.  Writes the
// fitted value of input i to out[i * stride].
inline void antitonic_fit_into(std::span<const double> values,
                               std::span<const double> weights,
                               PavWorkspace& ws, double* out,
                               std::size_t stride) {
  const std::size_t k = values.size();
  ws.sum_wv.clear();
  ws.sum_w.clear();
  ws.len.clear();
  for (std::size_t i = 0; i < k; ++i) {
    ws.sum_wv.push_back(weights[i] * values[i]);
    ws.sum_w.push_back(weights[i]);
    ws.len.push_back(1);
    while (ws.len.size() > 1) {
      const std::size_t top = ws.len.size() - 1;
      const double left_mean = ws.sum_wv[top - 1] / ws.sum_w[top - 1];
      const double right_mean = ws.sum_wv[top] / ws.sum_w[top];
      if (!(left_mean < right_mean)) break;
      ws.sum_wv[top - 1] += ws.sum_wv[top];
      ws.sum_w[top - 1] += ws.sum_w[top];
      ws.len[top - 1] += ws.len[top];
      ws.sum_wv.pop_back();
      ws.sum_w.pop_back();
      ws.len.pop_back();
    }
  }
  std::size_t pos = 0;
  for (std::size_t b = 0; b < ws.len.size(); ++b) {
    const double mean = ws.sum_wv[b] / ws.sum_w[b];
    for (std::size_t r = 0; r < ws.len[b]; ++r, ++pos) {
      out[pos * stride] = mean;
    }
  }
}

}  // namespace easyuq::detail

#endif  // EASYUQ_DETAIL_PAV_IMPL_HPP
