#include "latpred/models.hpp"

#include <cmath>

namespace latpred {
namespace {

double dot3(const std::array<double, 3>& w, const Features& x) {
  return w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
}

}  // namespace

double predict_rational_exp(const RationalExpParams& p, const Features& x, long row) {
  const double num = dot3(p.a, x);
  const double den = 1.0 + dot3(p.b, x) + p.c;
  if (!(den > kDenominatorFloor)) throw SingularDenominatorError(row);
  return num / den * std::exp(p.d * x[2]);
}

double predict_rational(const RationalParams& p, const Features& x, long row) {
  const double num = dot3(p.a, x);
  const double den = 1.0 + dot3(p.b, x) + p.c;
  if (!(den > kDenominatorFloor)) throw SingularDenominatorError(row);
  return num / den;
}

double predict_univariate_rational(const UnivariateRationalParams& p, double X) {
  if (!(X > 0.0)) throw std::domain_error("univariate rational model requires X > 0");
  const double den = 1.0 + p.a3 * std::pow(X, p.a4);
  if (!(den > kDenominatorFloor)) throw SingularDenominatorError(-1);
  return p.a1 * std::pow(X, p.a2) / den;
}

double predict_polynomial2(const PolynomialParams& p, const Features& x) {
  const auto& w = p.w;
  return w[0] + w[1] * x[0] + w[2] * x[1] + w[3] * x[2] + w[4] * x[0] * x[0] +
         w[5] * x[1] * x[1] + w[6] * x[2] * x[2] + w[7] * x[0] * x[1] + w[8] * x[0] * x[2] +
         w[9] * x[1] * x[2];
}

double predict_linear(const LinearParams& p, const Features& x) {
  return p.w0 + dot3(p.w, x);
}

double predict_sigmoid(const SigmoidParams& p, const Features& x) {
  const double z = dot3(p.w, x) + p.bias;
  return p.amplitude / (1.0 + std::exp(-z));
}

double mlp_forward(const MlpParams& p, const Features& x) {
  double out = p.b_out;
  for (int h = 0; h < p.hidden; ++h) {
    const double z = p.w_in[3 * h] * x[0] + p.w_in[3 * h + 1] * x[1] + p.w_in[3 * h + 2] * x[2] +
                     p.b_in[h];
    out += p.w_out[h] * std::tanh(z);
  }
  return out;
}

std::array<double, 8> jacobian_rational_exp(const RationalExpParams& p, const Features& x,
                                            long row) {
  const double num = dot3(p.a, x);
  const double den = 1.0 + dot3(p.b, x) + p.c;
  if (!(den > kDenominatorFloor)) throw SingularDenominatorError(row);
  const double e = std::exp(p.d * x[2]);
  const double yhat = num / den * e;
  std::array<double, 8> j{};
  for (int i = 0; i < 3; ++i) j[i] = x[i] * e / den;
  for (int i = 0; i < 3; ++i) j[3 + i] = -num * x[i] * e / (den * den);
  j[6] = -num * e / (den * den);
  j[7] = x[2] * yhat;
  return j;
}

std::array<double, 7> jacobian_rational(const RationalParams& p, const Features& x, long row) {
  const double num = dot3(p.a, x);
  const double den = 1.0 + dot3(p.b, x) + p.c;
  if (!(den > kDenominatorFloor)) throw SingularDenominatorError(row);
  std::array<double, 7> j{};
  for (int i = 0; i < 3; ++i) j[i] = x[i] / den;
  for (int i = 0; i < 3; ++i) j[3 + i] = -num * x[i] / (den * den);
  j[6] = -num / (den * den);
  return j;
}

std::array<double, 4> jacobian_univariate_rational(const UnivariateRationalParams& p, double X) {
  if (!(X > 0.0)) throw std::domain_error("univariate rational model requires X > 0");
  const double logx = std::log(X);
  const double pw2 = std::pow(X, p.a2);
  const double pw4 = std::pow(X, p.a4);
  const double den = 1.0 + p.a3 * pw4;
  if (!(den > kDenominatorFloor)) throw SingularDenominatorError(-1);
  std::array<double, 4> j{};
  j[0] = pw2 / den;
  j[1] = p.a1 * pw2 * logx / den;
  j[2] = -p.a1 * pw2 * pw4 / (den * den);
  j[3] = -p.a1 * pw2 * p.a3 * pw4 * logx / (den * den);
  return j;
}

std::array<double, 5> jacobian_sigmoid(const SigmoidParams& p, const Features& x) {
  const double z = dot3(p.w, x) + p.bias;
  const double s = 1.0 / (1.0 + std::exp(-z));
  const double ds = p.amplitude * s * (1.0 - s);
  return {s, ds * x[0], ds * x[1], ds * x[2], ds};
}

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::kRationalExp: return "rational_exp";
    case ModelFamily::kRational: return "rational";
    case ModelFamily::kUnivariateRational: return "univariate_rational";
    case ModelFamily::kPolynomial2: return "polynomial2";
    case ModelFamily::kLinear: return "linear";
    case ModelFamily::kSigmoid: return "sigmoid";
    case ModelFamily::kMlp: return "mlp";
  }
  throw std::logic_error("unreachable family");
}

ModelFamily family_from_name(const std::string& name) {
  if (name == "rational_exp") return ModelFamily::kRationalExp;
  if (name == "rational") return ModelFamily::kRational;
  if (name == "univariate_rational") return ModelFamily::kUnivariateRational;
  if (name == "polynomial2") return ModelFamily::kPolynomial2;
  if (name == "linear") return ModelFamily::kLinear;
  if (name == "sigmoid") return ModelFamily::kSigmoid;
  if (name == "mlp") return ModelFamily::kMlp;
  throw std::invalid_argument("unknown model family: " + name);
}

std::size_t family_param_count(ModelFamily family, int hidden) {
  switch (family) {
    case ModelFamily::kRationalExp: return 8;
    case ModelFamily::kRational: return 7;
    case ModelFamily::kUnivariateRational: return 4;
    case ModelFamily::kPolynomial2: return 10;
    case ModelFamily::kLinear: return 4;
    case ModelFamily::kSigmoid: return 5;
    case ModelFamily::kMlp: return static_cast<std::size_t>(4 * hidden + hidden + 1);
  }
  throw std::logic_error("unreachable family");
}

std::vector<double> pack_params(const RationalExpParams& p) {
  return {p.a[0], p.a[1], p.a[2], p.b[0], p.b[1], p.b[2], p.c, p.d};
}
std::vector<double> pack_params(const RationalParams& p) {
  return {p.a[0], p.a[1], p.a[2], p.b[0], p.b[1], p.b[2], p.c};
}
std::vector<double> pack_params(const UnivariateRationalParams& p) {
  return {p.a1, p.a2, p.a3, p.a4};
}
std::vector<double> pack_params(const PolynomialParams& p) {
  return std::vector<double>(p.w.begin(), p.w.end());
}
std::vector<double> pack_params(const LinearParams& p) {
  return {p.w0, p.w[0], p.w[1], p.w[2]};
}
std::vector<double> pack_params(const SigmoidParams& p) {
  return {p.amplitude, p.w[0], p.w[1], p.w[2], p.bias};
}
std::vector<double> pack_params(const MlpParams& p) {
  std::vector<double> v;
  v.reserve(family_param_count(ModelFamily::kMlp, p.hidden));
  v.insert(v.end(), p.w_in.begin(), p.w_in.end());
  v.insert(v.end(), p.b_in.begin(), p.b_in.end());
  v.insert(v.end(), p.w_out.begin(), p.w_out.end());
  v.push_back(p.b_out);
  return v;
}

namespace {
void check_size(const std::vector<double>& v, std::size_t expected, const char* family) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string("bad parameter count for ") + family);
  }
}
}  // namespace

RationalExpParams unpack_rational_exp(const std::vector<double>& v) {
  check_size(v, 8, "rational_exp");
  return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6], v[7]};
}
RationalParams unpack_rational(const std::vector<double>& v) {
  check_size(v, 7, "rational");
  return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6]};
}
UnivariateRationalParams unpack_univariate_rational(const std::vector<double>& v) {
  check_size(v, 4, "univariate_rational");
  return {v[0], v[1], v[2], v[3]};
}
PolynomialParams unpack_polynomial2(const std::vector<double>& v) {
  check_size(v, 10, "polynomial2");
  PolynomialParams p;
  for (std::size_t i = 0; i < 10; ++i) p.w[i] = v[i];
  return p;
}
LinearParams unpack_linear(const std::vector<double>& v) {
  check_size(v, 4, "linear");
  return {v[0], {v[1], v[2], v[3]}};
}
SigmoidParams unpack_sigmoid(const std::vector<double>& v) {
  check_size(v, 5, "sigmoid");
  return {v[0], {v[1], v[2], v[3]}, v[4]};
}
MlpParams unpack_mlp(const std::vector<double>& v, int hidden) {
  check_size(v, family_param_count(ModelFamily::kMlp, hidden), "mlp");
  MlpParams p;
  p.hidden = hidden;
  auto it = v.begin();
  p.w_in.assign(it, it + 3 * hidden);
  it += 3 * hidden;
  p.b_in.assign(it, it + hidden);
  it += hidden;
  p.w_out.assign(it, it + hidden);
  it += hidden;
  p.b_out = *it;
  return p;
}

double FittedModel::predict(const Features& x, long row) const {
  switch (family) {
    case ModelFamily::kRationalExp: return predict_rational_exp(unpack_rational_exp(params), x, row);
    case ModelFamily::kRational: return predict_rational(unpack_rational(params), x, row);
    case ModelFamily::kUnivariateRational: {
      // Column index of the stored single feature within (x1, x2, x3).
      int idx = 0;
      if (univariate_feature == columns::kUtilization) idx = 1;
      else if (univariate_feature == columns::kArrivalRateAll) idx = 2;
      return predict_univariate_rational(unpack_univariate_rational(params), x[idx]);
    }
    case ModelFamily::kPolynomial2: return predict_polynomial2(unpack_polynomial2(params), x);
    case ModelFamily::kLinear: return predict_linear(unpack_linear(params), x);
    case ModelFamily::kSigmoid: return predict_sigmoid(unpack_sigmoid(params), x);
    case ModelFamily::kMlp: return mlp_forward(unpack_mlp(params, hidden), x);
  }
  throw std::logic_error("unreachable family");
}

double FittedModel::predict_sample(const TelemetrySample& s) const {
  return predict(rescale_sample(s, scaling));
}

}  // namespace latpred
