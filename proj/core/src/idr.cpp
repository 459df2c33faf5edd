#include "easyuq/idr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "easyuq/detail/pav_impl.hpp"

namespace easyuq {

IdrModel::IdrModel(std::vector<double> unique_x,
                   std::shared_ptr<const ThresholdSet> thresholds,
                   std::vector<double> cdf_matrix)
    : unique_x_(std::move(unique_x)),
      thresholds_(std::move(thresholds)),
      cdf_(std::move(cdf_matrix)) {
  if (unique_x_.empty()) {
    throw std::invalid_argument("empty sample");
  }
  if (!thresholds_) {
    throw std::invalid_argument("null threshold set");
  }
  if (cdf_.size() != unique_x_.size() * thresholds_->size()) {
    throw std::invalid_argument("cdf matrix has wrong shape");
  }
  for (std::size_t r = 1; r < unique_x_.size(); ++r) {
    if (!(unique_x_[r - 1] < unique_x_[r])) {
      throw std::invalid_argument("covariates must be strictly increasing");
    }
  }
  const std::size_t width = thresholds_->size();
  for (std::size_t r = 0; r < unique_x_.size(); ++r) {
    const double* row = cdf_.data() + r * width;
    double prev = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double c = row[j];
      if (!(c >= -kCdfTol && c <= 1.0 + kCdfTol) || c < prev - kCdfTol) {
        throw std::invalid_argument("cdf matrix row is not a valid CDF");
      }
      prev = c;
    }
    if (std::abs(row[width - 1] - 1.0) > kCdfTol) {
      throw std::invalid_argument("cdf matrix row must end at 1");
    }
    if (r > 0) {
      const double* above = row - width;
      for (std::size_t j = 0; j < width; ++j) {
        if (above[j] < row[j] - kCdfTol) {
          throw std::invalid_argument("cdf matrix violates stochastic ordering");
        }
      }
    }
  }
}

std::span<const double> IdrModel::row(std::size_t r) const {
  const std::size_t width = m();
  return {cdf_.data() + r * width, width};
}

StepCdf IdrModel::row_cdf(std::size_t r) const {
  auto values = row(r);
  return StepCdf(thresholds_, std::vector<double>(values.begin(), values.end()));
}

std::size_t IdrModel::row_index_of(double x) const {
  auto it = std::lower_bound(unique_x_.begin(), unique_x_.end(), x);
  if (it != unique_x_.end() && *it == x) {
    return static_cast<std::size_t>(it - unique_x_.begin());
  }
  return unique_x_.size();
}

StepCdf IdrModel::predict(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("prediction point must be finite");
  }
  if (x <= unique_x_.front()) return row_cdf(0);
  if (x >= unique_x_.back()) return row_cdf(k() - 1);

  auto it = std::lower_bound(unique_x_.begin(), unique_x_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - unique_x_.begin());
  if (*it == x) return row_cdf(hi);

  const std::size_t lo = hi - 1;
  const double lambda = (unique_x_[hi] - x) / (unique_x_[hi] - unique_x_[lo]);
  auto left = row(lo);
  auto right = row(hi);
  std::vector<double> mixed(m());
  for (std::size_t j = 0; j < mixed.size(); ++j) {
    mixed[j] = lambda * left[j] + (1.0 - lambda) * right[j];
  }
  return StepCdf(thresholds_, std::move(mixed));
}

IdrModel fit_idr(const TrainingData& data) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.x()[a] < data.x()[b];
  });

  // pool tied covariates: one weighted point per distinct x
  std::vector<double> unique_x;
  std::vector<std::vector<double>> group_y;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = data.x()[order[i]];
    if (unique_x.empty() || unique_x.back() != x) {
      unique_x.push_back(x);
      group_y.emplace_back();
    }
    group_y.back().push_back(data.y()[order[i]]);
  }
  const std::size_t k = unique_x.size();
  std::vector<double> weights(k);
  for (std::size_t r = 0; r < k; ++r) {
    std::sort(group_y[r].begin(), group_y[r].end());
    weights[r] = static_cast<double>(group_y[r].size());
  }

  auto thresholds =
      std::make_shared<const ThresholdSet>(unique_thresholds(data.y()));
  const std::size_t m = thresholds->size();

  std::vector<double> cdf(k * m);
  std::vector<double> indicator(k);
  std::vector<std::size_t> cursor(k, 0);  // per group: count of y <= threshold
  detail::PavWorkspace ws;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = (*thresholds)[j];
    for (std::size_t r = 0; r < k; ++r) {
      auto& pos = cursor[r];
      const auto& ys = group_y[r];
      while (pos < ys.size() && ys[pos] <= t) ++pos;
      indicator[r] = static_cast<double>(pos) / weights[r];
    }
    detail::antitonic_fit_into(indicator, weights, ws, cdf.data() + j, m);
  }
  return IdrModel(std::move(unique_x), std::move(thresholds), std::move(cdf));
}

std::string to_json(const IdrModel& model) {
  nlohmann::json j;
  j["unique_x"] = model.unique_x();
  j["thresholds"] = model.thresholds().values();
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < model.k(); ++r) {
    auto row = model.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["cdf"] = std::move(rows);
  return j.dump();
}

IdrModel idr_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  auto unique_x = j.at("unique_x").get<std::vector<double>>();
  auto thresholds = std::make_shared<const ThresholdSet>(
      j.at("thresholds").get<std::vector<double>>());
  const auto& rows = j.at("cdf");
  std::vector<double> cdf;
  cdf.reserve(unique_x.size() * thresholds->size());
  for (const auto& row : rows) {
    auto values = row.get<std::vector<double>>();
    cdf.insert(cdf.end(), values.begin(), values.end());
  }
  return IdrModel(std::move(unique_x), std::move(thresholds), std::move(cdf));
}

void save_model(const IdrModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + path);
  }
  out << to_json(model) << '\n';
}

IdrModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open model file: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return idr_from_json(text);
}

}  // namespace easyuq
