#include "topicreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "topicreg/csv.hpp"
#include "topicreg/error.hpp"
#include "topicreg/log.hpp"

namespace topicreg {
namespace {

std::string printf_str(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string format_stat(double v) {
  if (v == std::floor(v) || std::abs(v) >= 100.0) return printf_str("%.0f", v);
  return printf_str("%.3f", v);
}

std::string se_cell(const RegressionRow& r, bool reliable) {
  return reliable && std::isfinite(r.se) ? "(" + format_coef(r.se) + ")" : "(n/a)";
}

std::string coef_cell(const RegressionRow& r, bool reliable) {
  return format_coef(r.coef) + (reliable ? r.stars : "");
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

bool is_hour(const std::string& column) { return column.rfind("hour_", 0) == 0; }

}  // namespace

std::optional<TableFormat> parse_table_format(std::string_view name) {
  if (name == "text" || name == "txt") return TableFormat::Text;
  if (name == "csv") return TableFormat::Csv;
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  return std::nullopt;
}

std::string format_coef(double v) {
  if (!std::isfinite(v)) return "nan";
  if (std::abs(v) < 1.0) {
    if (v == 0.0) return "0.000";
    return printf_str("%#.3g", v);
  }
  return printf_str("%.3f", v);
}

std::string display_label(const std::string& column, const TableOptions& options) {
  if (column == kInterceptName) return "Constant";
  if (column == "dem_debate") return "Democratic Debates";
  if (column == "rep_debate") return "Republican Debates";
  if (column == "followers_millions") return "Follower Count";
  if (column == "weekend") return "Weekend";
  if (column.rfind("topic_", 0) == 0) {
    const int k = std::stoi(column.substr(6));
    if (auto it = options.topic_labels.find(k); it != options.topic_labels.end()) return it->second;
    return "Topic " + std::to_string(k);
  }
  if (is_hour(column)) return "Hour " + column.substr(5);
  return column;
}

RegressionTable make_regression_table(const NbFit& fit, std::string title,
                                      const TableOptions& options) {
  RegressionTable t;
  t.title = std::move(title);
  t.n = fit.n;
  t.aic = fit.aic;
  t.cov_reliable = fit.cov_reliable;
  t.converged = fit.converged;
  for (std::size_t j = 0; j < static_cast<std::size_t>(fit.coef.size()); ++j) {
    RegressionRow row;
    row.column = fit.column_names[j];
    row.label = display_label(row.column, options);
    row.coef = fit.coef(static_cast<Eigen::Index>(j));
    row.se = std::numeric_limits<double>::quiet_NaN();
    if (fit.cov_reliable) {
      const WaldResult w = wald(fit, j);
      row.se = w.se;
      row.p_value = w.p_value;
      row.stars = significance_stars(w.p_value);
    }
    if (is_hour(row.column)) t.hour_controls = true;
    t.rows.push_back(std::move(row));
  }
  RegressionRow la;
  la.column = "ln_alpha";
  la.label = "Constant";
  la.coef = fit.ln_alpha;
  la.se = std::numeric_limits<double>::quiet_NaN();
  const auto P = fit.coef.size();
  if (fit.cov_reliable && fit.cov(P, P) >= 0.0) {
    const WaldResult w = wald(fit, static_cast<std::size_t>(P));
    la.se = w.se;
    la.p_value = w.p_value;
    la.stars = significance_stars(w.p_value);
  }
  t.ln_alpha = la;
  return t;
}

std::string render_regression_table(const NbFit& fit, TableFormat format,
                                    const TableOptions& options) {
  if (fit.coef.size() == 0) throw UsageError("cannot render a table without coefficients");
  const RegressionTable t = make_regression_table(fit, "NB2", options);
  return render_regression_tables(std::span<const RegressionTable>(&t, 1), format, options);
}

std::string render_regression_tables(std::span<const RegressionTable> tables, TableFormat format,
                                     const TableOptions& options) {
  if (tables.empty()) throw UsageError("no regression tables to render");
  for (const auto& t : tables) {
    if (t.rows.empty()) throw UsageError("cannot render a table without coefficients");
  }

  // Union of columns in first-appearance order.
  std::vector<std::pair<std::string, std::string>> columns;
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (is_hour(r.column) && !options.show_hour_rows) continue;
      if (std::none_of(columns.begin(), columns.end(),
                       [&](const auto& c) { return c.first == r.column; })) {
        columns.emplace_back(r.column, r.label);
      }
    }
  }
  auto find_row = [](const RegressionTable& t, const std::string& col) -> const RegressionRow* {
    for (const auto& r : t.rows) {
      if (r.column == col) return &r;
    }
    return nullptr;
  };
  const bool any_hours = std::any_of(tables.begin(), tables.end(),
                                     [](const auto& t) { return t.hour_controls; });

  std::ostringstream out;
  if (format == TableFormat::Csv) {
    csv::write_row(out, {"model", "variable", "label", "coef", "se", "p", "stars"});
    for (const auto& t : tables) {
      auto emit = [&](const std::string& equation, const RegressionRow& r) {
        csv::write_row(out, {t.title, equation + r.column, r.label, format_coef(r.coef),
                             t.cov_reliable && std::isfinite(r.se) ? format_coef(r.se) : "",
                             t.cov_reliable ? printf_str("%.4g", r.p_value) : "",
                             t.cov_reliable ? r.stars : ""});
      };
      for (const auto& [col, label] : columns) {
        if (const auto* r = find_row(t, col)) emit("", *r);
      }
      if (t.ln_alpha) emit("", *t.ln_alpha);
      csv::write_row(out, {t.title, "observations", "Observations", std::to_string(t.n), "", "", ""});
      csv::write_row(out, {t.title, "aic", "AIC", printf_str("%.1f", t.aic), "", "", ""});
    }
    return out.str();
  }

  if (format == TableFormat::Markdown) {
    out << "| |";
    for (const auto& t : tables) out << ' ' << t.title << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < tables.size(); ++i) out << "---|";
    out << '\n';
    auto md_row = [&](const std::string& label, auto&& cell) {
      out << "| " << label << " |";
      for (const auto& t : tables) out << ' ' << cell(t) << " |";
      out << '\n';
    };
    md_row("**likes**", [](const RegressionTable&) { return std::string(); });
    for (const auto& [col, label] : columns) {
      md_row(label, [&](const RegressionTable& t) {
        const auto* r = find_row(t, col);
        return r ? coef_cell(*r, t.cov_reliable) + " " + se_cell(*r, t.cov_reliable) : std::string();
      });
    }
    md_row("**ln(α)**", [](const RegressionTable&) { return std::string(); });
    md_row("Constant", [](const RegressionTable& t) {
      return t.ln_alpha ? coef_cell(*t.ln_alpha, t.cov_reliable) + " " +
                              se_cell(*t.ln_alpha, t.cov_reliable)
                        : std::string();
    });
    md_row("Observations", [](const RegressionTable& t) { return std::to_string(t.n); });
    md_row("AIC", [](const RegressionTable& t) { return printf_str("%.1f", t.aic); });
    if (any_hours) {
      md_row("Hour Controls", [](const RegressionTable& t) { return t.hour_controls ? "Yes" : "No"; });
    }
    out << "\nStandard errors in parentheses. * p<0.05, ** p<0.01, *** p<0.001\n";
    return out.str();
  }

  constexpr std::size_t kLabelWidth = 22;
  constexpr std::size_t kCoefWidth = 11;
  constexpr std::size_t kSeWidth = 12;
  const std::size_t width = kLabelWidth + tables.size() * (kCoefWidth + kSeWidth);
  const std::string heavy(width, '=');
  const std::string light(width, '-');

  out << "Negative Binomial Regression\n";
  for (const auto& t : tables) {
    if (!t.cov_reliable) {
      out << "WARNING: covariance for '" << t.title
          << "' is unreliable; standard errors and stars are suppressed\n";
    }
    if (!t.converged) out << "WARNING: fit '" << t.title << "' did not converge\n";
  }
  out << heavy << '\n' << pad("", kLabelWidth);
  for (const auto& t : tables) out << pad(t.title, kCoefWidth + kSeWidth);
  out << '\n' << light << '\n' << "likes\n";
  auto text_row = [&](const std::string& label, auto&& cells) {
    std::string line = pad(label, kLabelWidth);
    for (const auto& t : tables) {
      auto [c, s] = cells(t);
      line += pad(c, kCoefWidth) + pad(s, kSeWidth);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  };
  for (const auto& [col, label] : columns) {
    text_row(label, [&](const RegressionTable& t) {
      const auto* r = find_row(t, col);
      if (!r) return std::pair<std::string, std::string>{};
      return std::pair{coef_cell(*r, t.cov_reliable), se_cell(*r, t.cov_reliable)};
    });
  }
  out << light << '\n' << "ln(alpha)\n";
  text_row("Constant", [&](const RegressionTable& t) {
    if (!t.ln_alpha) return std::pair<std::string, std::string>{};
    return std::pair{coef_cell(*t.ln_alpha, t.cov_reliable), se_cell(*t.ln_alpha, t.cov_reliable)};
  });
  out << light << '\n';
  text_row("Observations", [](const RegressionTable& t) {
    return std::pair{std::to_string(t.n), std::string()};
  });
  text_row("AIC", [](const RegressionTable& t) {
    return std::pair{printf_str("%.1f", t.aic), std::string()};
  });
  if (any_hours) {
    text_row("Hour Controls", [](const RegressionTable& t) {
      return std::pair{std::string(t.hour_controls ? "Yes" : "No"), std::string()};
    });
  }
  out << heavy << '\n'
      << "Standard errors in parentheses\n"
      << "* p<0.05, ** p<0.01, *** p<0.001\n";
  return out.str();
}

std::string render_ci_svg(std::span<const CiPoint> points, const std::string& baseline_label) {
  constexpr double kWidth = 560, kHeight = 360;
  constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  double lo = 0.0, hi = 0.0;
  for (const auto& p : points) {
    lo = std::min(lo, p.lo);
    hi = std::max(hi, p.hi);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double margin = 0.1 * (hi - lo);
  lo -= margin;
  hi += margin;
  const double plot_h = kHeight - kTop - kBottom;
  const double plot_w = kWidth - kLeft - kRight;
  auto ypos = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  const double slot = plot_w / static_cast<double>(std::max<std::size_t>(points.size(), 1));

  std::ostringstream svg;
  auto num = [](double v) { return printf_str("%.2f", v); };
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' '
      << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << "Estimated Topic Coefficients (95% C.I.)</text>\n";
  // Axes and ticks.
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(ypos(v) + 4)
        << "\" text-anchor=\"end\">" << format_coef(v) << "</text>\n";
  }
  svg << "<line class=\"baseline\" x1=\"" << num(kLeft) << "\" y1=\"" << num(ypos(0.0))
      << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\"" << num(ypos(0.0))
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n"
      << "<text x=\"" << num(kLeft + plot_w) << "\" y=\"" << num(ypos(0.0) - 4)
      << "\" text-anchor=\"end\" fill=\"gray\">" << xml_escape(baseline_label) << " = 0</text>\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double x = kLeft + slot * (static_cast<double>(i) + 0.5);
    svg << "<g class=\"coefficient\">\n"
        << "<line class=\"whisker\" x1=\"" << num(x) << "\" y1=\"" << num(ypos(p.lo)) << "\" x2=\""
        << num(x) << "\" y2=\"" << num(ypos(p.hi)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n"
        << "<line x1=\"" << num(x - 8) << "\" y1=\"" << num(ypos(p.lo)) << "\" x2=\"" << num(x + 8)
        << "\" y2=\"" << num(ypos(p.lo)) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(x - 8) << "\" y1=\"" << num(ypos(p.hi)) << "\" x2=\"" << num(x + 8)
        << "\" y2=\"" << num(ypos(p.hi)) << "\" stroke=\"black\"/>\n"
        << "<circle cx=\"" << num(x) << "\" cy=\"" << num(ypos(p.estimate))
        << "\" r=\"4\" fill=\"steelblue\"/>\n"
        << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 20)
        << "\" text-anchor=\"middle\">" << xml_escape(p.name) << "</text>\n"
        << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<CiPoint> render_ci_plot(const NbFit& fit, std::span<const std::string> columns,
                                    const std::filesystem::path& stem, const TableOptions& options,
                                    std::string baseline_label) {
  std::vector<std::string> selected(columns.begin(), columns.end());
  if (selected.empty()) {
    for (const auto& name : fit.column_names) {
      if (name.rfind("topic_", 0) == 0) selected.push_back(name);
    }
  }
  std::vector<CiPoint> points;
  for (const auto& col : selected) {
    auto it = std::find(fit.column_names.begin(), fit.column_names.end(), col);
    if (it == fit.column_names.end()) throw UsageError("fit has no coefficient '" + col + "'");
    const WaldResult w = wald(fit, static_cast<std::size_t>(it - fit.column_names.begin()));
    points.push_back({display_label(col, options), w.estimate, w.ci_low, w.ci_high});
  }

  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  auto with_ext = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  std::ofstream svg(with_ext(".svg"), std::ios::binary);
  std::ofstream table(with_ext(".csv"), std::ios::binary);
  if (!svg || !table) throw DataError("cannot write CI plot files at " + stem.string());
  svg << render_ci_svg(points, baseline_label);
  csv::write_row(table, {"name", "estimate", "lo", "hi"});
  for (const auto& p : points) {
    csv::write_row(table, {p.name, printf_str("%.6g", p.estimate), printf_str("%.6g", p.lo),
                           printf_str("%.6g", p.hi)});
  }
  return points;
}

std::string render_topic_table(const TopicModel& model, std::size_t n_words,
                               const TableOptions& options) {
  const auto V = static_cast<std::size_t>(model.phi.cols());
  if (n_words > V) {
    warn("requested " + std::to_string(n_words) + " words per topic but vocabulary has " +
         std::to_string(V));
    n_words = V;
  }
  std::ostringstream out;
  for (int k = 0; k < model.num_topics; ++k) {
    out << "Topic " << k;
    if (auto it = options.topic_labels.find(k); it != options.topic_labels.end()) {
      out << " (" << it->second << ")";
    }
    out << ':';
    for (const auto& [term, prob] : top_words(model, k, n_words)) out << ' ' << term;
    out << '\n';
  }
  return out.str();
}

std::string render_summary_table(std::span<const SummaryRow> rows, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::Csv) {
    csv::write_row(out, {"variable", "min", "max", "mean", "sd", "n"});
    for (const auto& r : rows) {
      csv::write_row(out, {r.variable, format_stat(r.min), format_stat(r.max), format_stat(r.mean),
                           format_stat(r.sd), std::to_string(r.n)});
    }
    return out.str();
  }
  if (format == TableFormat::Markdown) {
    out << "| Variable | Min | Max | Mean | S.D. | N |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      out << "| " << r.variable << " | " << format_stat(r.min) << " | " << format_stat(r.max)
          << " | " << format_stat(r.mean) << " | " << format_stat(r.sd) << " | " << r.n << " |\n";
    }
    return out.str();
  }
  out << "Summary statistics\n";
  out << pad("Variable", 22) << pad("Min", 9) << pad("Max", 9) << pad("Mean", 9) << pad("S.D.", 9)
      << "N\n";
  for (const auto& r : rows) {
    out << pad(r.variable, 22) << pad(format_stat(r.min), 9) << pad(format_stat(r.max), 9)
        << pad(format_stat(r.mean), 9) << pad(format_stat(r.sd), 9) << r.n << '\n';
  }
  return out.str();
}

}  // namespace topicreg
