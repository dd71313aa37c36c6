#include "ddmpc/signals.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ddmpc/errors.hpp"
#include "ddmpc/text.hpp"

namespace ddmpc {

int element_dimension(const Sequence& seq) {
  if (seq.empty()) {
    throw ShapeError("empty sequence");
  }
  const auto q = seq.front().size();
  for (std::size_t k = 1; k < seq.size(); ++k) {
    if (seq[k].size() != q) {
      throw ShapeError("sequence element " + std::to_string(k) + " has dimension " +
                       std::to_string(seq[k].size()) + ", expected " + std::to_string(q));
    }
  }
  return static_cast<int>(q);
}

Eigen::VectorXd stack(const Sequence& seq) {
  if (seq.empty()) {
    return {};
  }
  const int q = element_dimension(seq);
  Eigen::VectorXd out(static_cast<Eigen::Index>(q) * seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    out.segment(static_cast<Eigen::Index>(k) * q, q) = seq[k];
  }
  return out;
}

Sequence unstack(const Eigen::VectorXd& stacked, int dim) {
  if (dim <= 0 || stacked.size() % dim != 0) {
    throw ShapeError("cannot split vector of size " + std::to_string(stacked.size()) +
                     " into blocks of " + std::to_string(dim));
  }
  Sequence out;
  out.reserve(stacked.size() / dim);
  for (Eigen::Index k = 0; k < stacked.size(); k += dim) {
    out.emplace_back(stacked.segment(k, dim));
  }
  return out;
}

Sequence zeros(int dim, int count) {
  return Sequence(static_cast<std::size_t>(count), Eigen::VectorXd::Zero(dim));
}

TrajectoryData::TrajectoryData(Sequence u, Sequence y, std::optional<Sequence> y_clean)
    : u_(std::move(u)), y_(std::move(y)), y_clean_(std::move(y_clean)) {
  if (u_.empty()) {
    throw ShapeError("trajectory must contain at least one sample");
  }
  if (u_.size() != y_.size()) {
    throw ShapeError("input and output sequences differ in length (" + std::to_string(u_.size()) +
                     " vs " + std::to_string(y_.size()) + ")");
  }
  m_ = element_dimension(u_);
  p_ = element_dimension(y_);
  if (m_ == 0 || p_ == 0) {
    throw ShapeError("input and output dimensions must be positive");
  }
  if (y_clean_) {
    if (y_clean_->size() != y_.size() || element_dimension(*y_clean_) != p_) {
      throw ShapeError("clean outputs do not match measured outputs in shape");
    }
  }
}

TrajectoryData TrajectoryData::noise_free() const {
  if (!y_clean_) {
    return *this;
  }
  return TrajectoryData(u_, *y_clean_, y_clean_);
}

HankelMatrix build_hankel(const Sequence& seq, int depth) {
  const int q = element_dimension(seq);
  const int n_samples = static_cast<int>(seq.size());
  if (depth <= 0) {
    throw WindowTooDeepError("Hankel depth must be positive");
  }
  if (depth > n_samples) {
    throw WindowTooDeepError("Hankel depth " + std::to_string(depth) + " exceeds sequence length " +
                             std::to_string(n_samples));
  }
  const int cols = n_samples - depth + 1;
  HankelMatrix h;
  h.depth = depth;
  h.block_dim = q;
  h.entries.resize(static_cast<Eigen::Index>(q) * depth, cols);
  for (int i = 0; i < depth; ++i) {
    for (int j = 0; j < cols; ++j) {
      h.entries.block(static_cast<Eigen::Index>(i) * q, j, q, 1) = seq[static_cast<std::size_t>(i + j)];
    }
  }
  return h;
}

PeReport is_persistently_exciting(const Sequence& seq, int order, double rel_tol) {
  const int m = element_dimension(seq);
  const int n_samples = static_cast<int>(seq.size());
  PeReport report;
  report.required_rank = m * order;
  if (order <= 0) {
    throw PreconditionError("excitation order must be positive");
  }
  if (order > n_samples || n_samples - order + 1 < m * order) {
    return report;
  }
  const HankelMatrix h = build_hankel(seq, order);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h.entries);
  const Eigen::VectorXd& s = svd.singularValues();
  const double threshold = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) {
      ++report.rank;
    }
  }
  report.min_singular_value = s(report.required_rank - 1);
  report.exciting = report.rank == report.required_rank && s(0) > 0.0;
  return report;
}

Eigen::VectorXd extract_window(const Sequence& seq, int a, int b) {
  const int n_samples = static_cast<int>(seq.size());
  if (a < 0 || b < a || b >= n_samples) {
    throw IndexError("window [" + std::to_string(a) + ", " + std::to_string(b) +
                     "] outside of sequence of length " + std::to_string(n_samples));
  }
  return stack(Sequence(seq.begin() + a, seq.begin() + b + 1));
}

Eigen::VectorXd ExtendedState::stacked() const {
  Eigen::VectorXd xi(u_past.size() + y_past.size());
  xi << u_past, y_past;
  return xi;
}

ExtendedState ExtendedState::from_stacked(const Eigen::VectorXd& xi, int m, int p, int n) {
  if (xi.size() != static_cast<Eigen::Index>(m + p) * n) {
    throw ShapeError("extended state has dimension " + std::to_string(xi.size()) + ", expected " +
                     std::to_string((m + p) * n));
  }
  ExtendedState s;
  s.n = n;
  s.u_past = xi.head(static_cast<Eigen::Index>(m) * n);
  s.y_past = xi.tail(static_cast<Eigen::Index>(p) * n);
  return s;
}

ExtendedState ExtendedState::zero(int m, int p, int n) {
  return from_stacked(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + p) * n), m, p, n);
}

ExtendedState extended_state(const Sequence& u_hist, const Sequence& y_hist, int n) {
  if (n <= 0) {
    throw PreconditionError("state-order bound must be positive");
  }
  if (static_cast<int>(u_hist.size()) < n || static_cast<int>(y_hist.size()) < n) {
    throw InsufficientHistoryError("need " + std::to_string(n) + " past samples, have " +
                                   std::to_string(std::min(u_hist.size(), y_hist.size())));
  }
  ExtendedState s;
  s.n = n;
  s.u_past = extract_window(u_hist, static_cast<int>(u_hist.size()) - n, static_cast<int>(u_hist.size()) - 1);
  s.y_past = extract_window(y_hist, static_cast<int>(y_hist.size()) - n, static_cast<int>(y_hist.size()) - 1);
  return s;
}

MembershipResult membership_residual(const TrajectoryData& data, const TrajectoryData& candidate,
                                     std::optional<int> state_order, double rel_tol) {
  if (data.m() != candidate.m() || data.p() != candidate.p()) {
    throw ShapeError("candidate dimensions (m=" + std::to_string(candidate.m()) + ", p=" +
                     std::to_string(candidate.p()) + ") differ from data (m=" + std::to_string(data.m()) +
                     ", p=" + std::to_string(data.p()) + ")");
  }
  const int depth = candidate.size();
  const HankelMatrix hu = build_hankel(data.inputs(), depth);
  const HankelMatrix hy = build_hankel(data.outputs(), depth);
  Eigen::MatrixXd stacked_h(hu.entries.rows() + hy.entries.rows(), hu.columns());
  stacked_h << hu.entries, hy.entries;
  Eigen::VectorXd target(stacked_h.rows());
  target << stack(candidate.inputs()), stack(candidate.outputs());

  MembershipResult result;
  result.alpha = pseudoinverse(stacked_h, rel_tol) * target;
  result.residual = (stacked_h * result.alpha - target).norm();
  if (state_order) {
    result.excitation_sufficient =
        is_persistently_exciting(data.inputs(), depth + *state_order, rel_tol).exciting;
  }
  return result;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryData& data) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << "t";
  for (int i = 0; i < data.m(); ++i) out << ",u_" << i;
  for (int i = 0; i < data.p(); ++i) out << ",y_" << i;
  const bool clean = data.clean_outputs().has_value();
  if (clean) {
    for (int i = 0; i < data.p(); ++i) out << ",y_clean_" << i;
  }
  out << '\n';
  for (int k = 0; k < data.size(); ++k) {
    out << k;
    for (int i = 0; i < data.m(); ++i) out << ',' << text::format_double(data.inputs()[k](i));
    for (int i = 0; i < data.p(); ++i) out << ',' << text::format_double(data.outputs()[k](i));
    if (clean) {
      for (int i = 0; i < data.p(); ++i) out << ',' << text::format_double((*data.clean_outputs())[k](i));
    }
    out << '\n';
  }
}

TrajectoryData read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open trajectory file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("trajectory file '" + path.string() + "' is empty");
  }
  const auto header = text::split(line, ",");
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    column[std::string(text::trim(header[c]))] = c;
  }
  if (!column.count("t")) {
    throw IoError("trajectory file '" + path.string() + "' lacks the mandatory header row");
  }
  auto count_prefix = [&](const std::string& prefix) {
    int count = 0;
    while (column.count(prefix + std::to_string(count))) ++count;
    return count;
  };
  const int m = count_prefix("u_");
  const int p = count_prefix("y_");
  const int p_clean = count_prefix("y_clean_");
  if (m == 0 || p == 0) {
    throw IoError("trajectory file '" + path.string() + "' needs u_0 and y_0 columns");
  }

  Sequence u;
  Sequence y;
  Sequence y_clean;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ",");
    if (cells.size() != header.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " columns");
    }
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    auto read_block = [&](const std::string& prefix, int dim) {
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v(i) = text::parse_double(cells[column.at(prefix + std::to_string(i))], ctx);
      return v;
    };
    u.push_back(read_block("u_", m));
    y.push_back(read_block("y_", p));
    if (p_clean == p) y_clean.push_back(read_block("y_clean_", p));
  }
  if (u.empty()) {
    throw IoError("trajectory file '" + path.string() + "' has no samples");
  }
  if (p_clean == p) {
    return TrajectoryData(std::move(u), std::move(y), std::move(y_clean));
  }
  return TrajectoryData(std::move(u), std::move(y));
}

}  // namespace ddmpc
