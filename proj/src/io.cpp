#include "palmfit/io.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace palmfit {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("could not parse " + what + " value '" + s + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvHeader {
  std::vector<int> coord_cols;  // x, y (, z)
  int class_col = -1;
  int image_col = -1;
  int patient_col = -1;
  int outcome_col = -1;
};

CsvHeader parse_header(const std::string& line, const std::filesystem::path& path) {
  CsvHeader header;
  const auto fields = split(line, ',');
  int x = -1, y = -1, z = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string name = trim(fields[i]);
    if (name == "x") x = static_cast<int>(i);
    else if (name == "y") y = static_cast<int>(i);
    else if (name == "z") z = static_cast<int>(i);
    else if (name == "class") header.class_col = static_cast<int>(i);
    else if (name == "image_id") header.image_col = static_cast<int>(i);
    else if (name == "patient_id") header.patient_col = static_cast<int>(i);
    else if (name == "outcome") header.outcome_col = static_cast<int>(i);
  }
  if (x < 0 || y < 0)
    throw std::invalid_argument(path.string() +
                                ": header row with at least columns x,y required");
  header.coord_cols = {x, y};
  if (z >= 0) header.coord_cols.push_back(z);
  return header;
}

Window window_from_json(const json& j, const std::string& what) {
  if (!j.contains("lower") || !j.contains("upper"))
    throw std::invalid_argument(what + ": window needs 'lower' and 'upper' arrays");
  std::vector<double> lo = j.at("lower").get<std::vector<double>>();
  std::vector<double> hi = j.at("upper").get<std::vector<double>>();
  return Window(std::move(lo), std::move(hi));
}

void check_schema(const json& j, const char* expected, const std::filesystem::path& path) {
  if (!j.contains("schema") || j.at("schema").get<std::string>() != expected)
    throw std::invalid_argument(path.string() + ": expected schema '" + expected +
                                "', found '" +
                                (j.contains("schema") ? j.at("schema").dump() : "none") +
                                "'");
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

void dump_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

PointPattern read_pattern_csv(const std::filesystem::path& path, const Window& window) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path.string() + ": empty file");
  const CsvHeader header = parse_header(line, path);
  if (static_cast<int>(header.coord_cols.size()) != window.dim())
    throw std::invalid_argument(path.string() + ": csv has " +
                                std::to_string(header.coord_cols.size()) +
                                " coordinate columns but the window is " +
                                std::to_string(window.dim()) + "-dimensional");

  std::vector<double> coords;
  std::vector<std::string> marks;
  bool any_mark = false;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    for (int col : header.coord_cols) {
      if (col >= static_cast<int>(fields.size()))
        throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                    ": missing coordinate field");
      coords.push_back(parse_double(trim(fields[col]), "coordinate"));
    }
    if (header.class_col >= 0 && header.class_col < static_cast<int>(fields.size())) {
      marks.push_back(trim(fields[header.class_col]));
      if (!marks.back().empty()) any_mark = true;
    } else {
      marks.push_back("");
    }
  }
  if (!any_mark) marks.clear();
  return PointPattern(std::move(coords), window, std::move(marks));
}

void write_pattern_csv(const std::filesystem::path& path, const PointPattern& p) {
  const int d = p.dim();
  if (d != 2 && d != 3)
    throw std::invalid_argument("write_pattern_csv: only d=2,3 supported");
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << (d == 2 ? "x,y" : "x,y,z");
  const bool marked = !p.marks.empty();
  if (marked) out << ",class";
  out << "\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto pt = p.point(i);
    for (int k = 0; k < d; ++k) {
      if (k) out << ",";
      out << format_double(pt[k]);
    }
    if (marked) out << "," << p.marks[i];
    out << "\n";
  }
}

CohortDataset read_cohort_csv(const std::filesystem::path& path,
                              const std::map<std::string, Window>& windows) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path.string() + ": empty file");
  const CsvHeader header = parse_header(line, path);
  if (header.class_col < 0 || header.image_col < 0 || header.patient_col < 0 ||
      header.outcome_col < 0)
    throw std::invalid_argument(
        path.string() + ": cohort csv needs patient_id,image_id,class,outcome columns");

  const auto window_for = [&](const std::string& image_id) -> const Window& {
    auto it = windows.find(image_id);
    if (it == windows.end()) it = windows.find("");
    if (it == windows.end())
      throw std::invalid_argument("no window for image '" + image_id +
                                  "' and no default window given");
    return it->second;
  };

  struct RawImage {
    std::vector<double> tumour, stroma;
  };
  std::vector<std::string> patient_order;
  std::map<std::string, int> outcomes;
  std::map<std::string, std::vector<std::string>> image_order;
  std::map<std::string, std::map<std::string, RawImage>> data;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    const auto field = [&](int col) -> std::string {
      if (col >= static_cast<int>(fields.size()))
        throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                    ": missing field");
      return trim(fields[col]);
    };
    const std::string patient = field(header.patient_col);
    const std::string image = field(header.image_col);
    const std::string cls = field(header.class_col);
    const int outcome = static_cast<int>(parse_double(field(header.outcome_col), "outcome"));
    if (outcome != 0 && outcome != 1)
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": outcome must be 0 or 1");
    if (auto it = outcomes.find(patient); it == outcomes.end()) {
      outcomes[patient] = outcome;
      patient_order.push_back(patient);
    } else if (it->second != outcome) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": inconsistent outcome for patient " + patient);
    }
    auto& images = data[patient];
    if (images.find(image) == images.end()) image_order[patient].push_back(image);
    auto& raw = images[image];
    std::vector<double>* target = nullptr;
    if (cls == "tumour") target = &raw.tumour;
    else if (cls == "stroma") target = &raw.stroma;
    else
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": class must be 'tumour' or 'stroma', got '" + cls + "'");
    for (int col : header.coord_cols)
      target->push_back(parse_double(field(col), "coordinate"));
  }

  CohortDataset cohort;
  for (const auto& pid : patient_order) {
    PatientData patient;
    patient.id = pid;
    patient.outcome = outcomes[pid];
    for (const auto& iid : image_order[pid]) {
      const Window& w = window_for(iid);
      auto& raw = data[pid][iid];
      ImageData image;
      image.id = iid;
      image.tumour = PointPattern(std::move(raw.tumour), w);
      image.stroma = PointPattern(std::move(raw.stroma), w);
      patient.images.push_back(std::move(image));
    }
    cohort.patients.push_back(std::move(patient));
  }
  return cohort;
}

Window parse_window_spec(const std::string& spec) {
  const auto fields = split(spec, ',');
  if (fields.size() < 4 || fields.size() % 2 != 0)
    throw std::invalid_argument(
        "window spec must be 'lower coords,upper coords' with an even count, e.g. 0,0,1,1");
  const std::size_t d = fields.size() / 2;
  std::vector<double> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = parse_double(trim(fields[i]), "window");
    hi[i] = parse_double(trim(fields[d + i]), "window");
  }
  return Window(std::move(lo), std::move(hi));
}

std::map<std::string, Window> read_windows_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  check_schema(j, kWindowsSchema, path);
  std::map<std::string, Window> out;
  if (j.contains("default")) out.emplace("", window_from_json(j.at("default"), "default"));
  if (j.contains("images")) {
    for (const auto& [key, value] : j.at("images").items())
      out.emplace(key, window_from_json(value, key));
  }
  if (out.empty())
    throw std::invalid_argument(path.string() + ": no 'default' or 'images' windows");
  return out;
}

void write_fit_json(const std::filesystem::path& path, ModelKind model,
                    const FitResult& fit) {
  json params;
  const auto v = params_to_vector(fit.params);
  switch (model) {
    case ModelKind::poisson:
      params["lambda"] = v[0];
      break;
    case ModelKind::thomas:
      params["D"] = v[0];
      params["nu"] = v[1];
      params["sigma"] = v[2];
      break;
    case ModelKind::matern:
      params["D"] = v[0];
      params["nu"] = v[1];
      params["R"] = v[2];
      break;
    case ModelKind::void_process:
      params["D"] = v[0];
      params["R"] = v[1];
      params["lambda"] = v[2];
      break;
  }
  json j;
  j["schema"] = kFitSchema;
  j["model"] = to_string(model);
  j["params"] = params;
  j["loglik"] = fit.loglik;
  j["t"] = fit.truncation;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["n_pairs"] = fit.n_pairs_used;
  if (fit.daughter_density) j["daughter_density"] = *fit.daughter_density;
  if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
  dump_json(path, j);
}

std::pair<ModelKind, FitResult> read_fit_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  check_schema(j, kFitSchema, path);
  const ModelKind model = model_kind_from_string(j.at("model").get<std::string>());
  const json& params = j.at("params");
  FitResult fit;
  switch (model) {
    case ModelKind::poisson:
      fit.params = PoissonParams{params.at("lambda").get<double>()};
      break;
    case ModelKind::thomas:
      fit.params = ThomasParams{params.at("D").get<double>(), params.at("nu").get<double>(),
                                params.at("sigma").get<double>()};
      break;
    case ModelKind::matern:
      fit.params = MaternParams{params.at("D").get<double>(), params.at("nu").get<double>(),
                                params.at("R").get<double>()};
      break;
    case ModelKind::void_process:
      fit.params = VoidParams{params.at("D").get<double>(), params.at("R").get<double>(),
                              params.at("lambda").get<double>()};
      break;
  }
  fit.loglik = j.at("loglik").get<double>();
  fit.truncation = j.at("t").get<double>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.value("iterations", 0);
  fit.n_pairs_used = j.value("n_pairs", 0);
  if (j.contains("daughter_density"))
    fit.daughter_density = j.at("daughter_density").get<double>();
  return {model, fit};
}

namespace {

// SHA-256 (FIPS 180-4), plain portable implementation.
class Sha256 {
 public:
  Sha256() { reset(); }

  void update(const unsigned char* data, std::size_t size) {
    total_ += size;
    while (size > 0) {
      const std::size_t take = std::min(size, std::size_t(64) - fill_);
      std::memcpy(buffer_ + fill_, data, take);
      fill_ += take;
      data += take;
      size -= take;
      if (fill_ == 64) {
        process(buffer_);
        fill_ = 0;
      }
    }
  }

  std::string hex() {
    unsigned char final_block[128];
    std::size_t fin = fill_;
    std::memcpy(final_block, buffer_, fin);
    final_block[fin++] = 0x80;
    std::size_t blocks = fin <= 56 ? 64 : 128;
    std::memset(final_block + fin, 0, blocks - fin - 8);
    const std::uint64_t bits = total_ * 8;
    for (int i = 0; i < 8; ++i)
      final_block[blocks - 1 - i] = static_cast<unsigned char>(bits >> (8 * i));
    process(final_block);
    if (blocks == 128) process(final_block + 64);

    static const char* digits = "0123456789abcdef";
    std::string out(64, '0');
    for (int i = 0; i < 8; ++i)
      for (int b = 0; b < 4; ++b) {
        const unsigned byte = (h_[i] >> (24 - 8 * b)) & 0xFF;
        out[i * 8 + b * 2] = digits[byte >> 4];
        out[i * 8 + b * 2 + 1] = digits[byte & 0xF];
      }
    return out;
  }

 private:
  void reset() {
    static const std::uint32_t init[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::memcpy(h_, init, sizeof h_);
    total_ = 0;
    fill_ = 0;
  }

  void process(const unsigned char* block) {
    static const std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
        0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
        0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
        0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
        0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
        0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
    const auto rotr = [](std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); };
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
    std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      h = g; g = f; f = e; e = d + t1;
      d = c; c = b; b = a; a = t1 + t2;
    }
    h_[0] += a; h_[1] += b; h_[2] += c; h_[3] += d;
    h_[4] += e; h_[5] += f; h_[6] += g; h_[7] += h;
  }

  std::uint32_t h_[8];
  std::uint64_t total_ = 0;
  unsigned char buffer_[64];
  std::size_t fill_ = 0;
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
  Sha256 state;
  state.update(static_cast<const unsigned char*>(data), size);
  return state.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  Sha256 state;
  char buffer[65536];
  while (in) {
    in.read(buffer, sizeof buffer);
    state.update(reinterpret_cast<const unsigned char*>(buffer),
                 static_cast<std::size_t>(in.gcount()));
  }
  return state.hex();
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::string>& argv, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& inputs) {
  json j;
  j["schema"] = kManifestSchema;
  j["version"] = kVersion;
  std::string command;
  for (const auto& arg : argv) {
    if (!command.empty()) command += ' ';
    command += arg;
  }
  j["command"] = command;
  j["seed"] = seed;
  json digests = json::object();
  for (const auto& input : inputs) digests[input.string()] = sha256_file(input);
  j["inputs"] = digests;
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  j["timestamp"] = stamp;
  dump_json(path, j);
}

}  // namespace palmfit
