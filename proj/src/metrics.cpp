#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dgo/harness.hpp"

namespace dgo {
namespace {

nlohmann::json db(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

std::string db_csv(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

InferResult infer(const Generator<float>& g, const Sample& s, const EdgeLossParams& p) {
  const auto out = g.forward(s);
  InferResult r{out.rgb.value(), {}};
  r.edges = canny_edges(r.rgb, p.canny_low, p.canny_high);
  return r;
}

double psnr(const Tensor<float>& pred, const Tensor<float>& gt, const BinaryMask* region) {
  require(pred.same_shape(gt), "psnr: shapes differ (" + pred.shape_string() + " vs " + gt.shape_string() + ")");
  require(gt.rank() == 3, "psnr expects C x H x W images");
  if (region != nullptr) {
    require(region->height() == gt.height() && region->width() == gt.width(), "psnr: region mask resolution");
  }
  double se = 0;
  std::size_t n = 0;
  for (int c = 0; c < gt.channels(); ++c) {
    for (std::size_t i = 0; i < gt.plane(); ++i) {
      if (region != nullptr && !(*region)[i]) continue;
      const double d = static_cast<double>(pred.channel(c)[i]) - gt.channel(c)[i];
      se += d * d;
      ++n;
    }
  }
  require(n > 0, "psnr: empty region");
  if (se == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(1.0 / (se / static_cast<double>(n)));
}

EdgeAgreement edge_agreement(const EdgeMap& pred, const EdgeMap& gt) {
  require(pred.height() == gt.height() && pred.width() == gt.width(), "edge_agreement: shape mismatch");
  const double tp = static_cast<double>((pred & gt).count());
  const double np = static_cast<double>(pred.count());
  const double ng = static_cast<double>(gt.count());
  EdgeAgreement a;
  if (np == 0 && ng == 0) return a;
  a.precision = np > 0 ? tp / np : 0.0;
  a.recall = ng > 0 ? tp / ng : 0.0;
  a.f1 = (a.precision + a.recall) > 0 ? 2 * a.precision * a.recall / (a.precision + a.recall) : 0.0;
  return a;
}

EvalReport evaluate_predictions(const std::vector<Tensor<float>>& preds,
                                const std::vector<std::pair<std::string, Sample>>& data, const EdgeLossParams& p) {
  require(!data.empty(), "evaluate: empty dataset");
  require(preds.size() == data.size(), "evaluate: prediction count differs from dataset size");
  EvalReport r;
  auto& agg = r.aggregate;
  agg.name = "aggregate";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& [name, s] = data[k];
    const auto& pred = preds[k];
    const auto unknown = s.input_rgb.mask.inverted();
    SampleMetrics m;
    m.name = name;
    m.psnr_full = psnr(pred, s.full_rgb);
    m.psnr_unknown = psnr(pred, s.full_rgb, &unknown);
    const auto e = edge_agreement(canny_edges(pred, p.canny_low, p.canny_high),
                                  canny_edges(s.full_rgb, p.canny_low, p.canny_high));
    m.edge_precision = e.precision;
    m.edge_recall = e.recall;
    m.edge_f1 = e.f1;
    const double pixels = static_cast<double>(s.full_rgb.plane());
    m.known_fraction = static_cast<double>(s.input_rgb.mask.count()) / pixels;
    m.depth_density = static_cast<double>(s.depth.mask.count()) / pixels;
    r.samples.push_back(m);
  }
  const double n = static_cast<double>(r.samples.size());
  for (const auto& m : r.samples) {
    agg.psnr_full += m.psnr_full / n;
    agg.psnr_unknown += m.psnr_unknown / n;
    agg.edge_precision += m.edge_precision / n;
    agg.edge_recall += m.edge_recall / n;
    agg.edge_f1 += m.edge_f1 / n;
    agg.known_fraction += m.known_fraction / n;
    agg.depth_density += m.depth_density / n;
  }
  if (r.samples.size() == 1) {
    const auto name = agg.name;
    agg = r.samples.front();
    agg.name = name;
  }
  return r;
}

EvalReport evaluate(const Generator<float>& g, const std::vector<std::pair<std::string, Sample>>& data,
                    const EdgeLossParams& p) {
  require(!data.empty(), "evaluate: empty dataset");
  std::vector<Tensor<float>> preds;
  for (const auto& [name, s] : data) preds.push_back(infer(g, s, p).rgb);
  return evaluate_predictions(preds, data, p);
}

void write_report(const EvalReport& r, const std::filesystem::path& json_path) {
  if (json_path.has_parent_path()) std::filesystem::create_directories(json_path.parent_path());
  const auto& a = r.aggregate;
  nlohmann::json j = {
      {"samples", r.samples.size()},
      {"psnr_full_db", db(a.psnr_full)},
      {"psnr_unknown_db", db(a.psnr_unknown)},
      {"edge_precision", a.edge_precision},
      {"edge_recall", a.edge_recall},
      {"edge_f1", a.edge_f1},
      {"known_fraction", a.known_fraction},
      {"depth_density", a.depth_density},
      {"fid", "unavailable"},
      {"lpips", "unavailable"},
      {"ap", "unavailable"},
  };
  std::ofstream out(json_path);
  if (!out) throw InputError("cannot write report " + json_path.string());
  out << j.dump(2) << '\n';

  auto csv_path = json_path;
  csv_path.replace_extension(".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw InputError("cannot write report " + csv_path.string());
  csv << "sample,psnr_full_db,psnr_unknown_db,edge_precision,edge_recall,edge_f1,known_fraction,depth_density\n";
  for (const auto& m : r.samples) {
    char tail[160];
    std::snprintf(tail, sizeof(tail), "%.6f,%.6f,%.6f,%.6f,%.6f", m.edge_precision, m.edge_recall, m.edge_f1,
                  m.known_fraction, m.depth_density);
    csv << m.name << ',' << db_csv(m.psnr_full) << ',' << db_csv(m.psnr_unknown) << ',' << tail << '\n';
  }
}

Tensor<float> edge_image(const EdgeMap& e) {
  Tensor<float> out(3, e.height(), e.width());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < out.plane(); ++i) out.channel(c)[i] = e[i] ? 1.0f : 0.0f;
  }
  return out;
}

Tensor<float> montage(const std::vector<std::vector<Tensor<float>>>& rows) {
  constexpr int kGap = 2;
  require(!rows.empty() && !rows.front().empty(), "montage: no panels");
  const int h = rows.front().front().height(), w = rows.front().front().width();
  std::size_t cols = 0;
  for (const auto& row : rows) {
    cols = std::max(cols, row.size());
    for (const auto& p : row) {
      require(p.rank() == 3 && p.channels() == 3 && p.height() == h && p.width() == w,
              "montage: panels must all be 3 x " + std::to_string(h) + " x " + std::to_string(w));
    }
  }
  const int out_h = static_cast<int>(rows.size()) * (h + kGap) - kGap;
  const int out_w = static_cast<int>(cols) * (w + kGap) - kGap;
  Tensor<float> out(3, out_h, out_w);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < rows[r].size(); ++k) {
      const auto& p = rows[r][k];
      const int oy = static_cast<int>(r) * (h + kGap), ox = static_cast<int>(k) * (w + kGap);
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) out(c, oy + y, ox + x) = p(c, y, x);
        }
      }
    }
  }
  return out;
}

}  // namespace dgo
