#pragma once

#include "fva/motion/clip.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>

namespace fva::motion {

/// Distinct failure classes of the BVH reader.
enum class BvhErrorKind {
  Syntax,
  ChannelCountMismatch,
  FrameCountMismatch,
  NonPositiveFrameTime,
  UnsupportedChannel,
};

inline std::string_view to_string(BvhErrorKind k) {
  switch (k) {
    case BvhErrorKind::Syntax: return "syntax error";
    case BvhErrorKind::ChannelCountMismatch: return "channel count mismatch";
    case BvhErrorKind::FrameCountMismatch: return "frame count mismatch";
    case BvhErrorKind::NonPositiveFrameTime: return "non-positive frame time";
    case BvhErrorKind::UnsupportedChannel: return "unsupported channel";
  }
  return "";
}

class BvhError : public MotionError {
 public:
  BvhError(BvhErrorKind kind, std::size_t line, std::size_t column, const std::string& what)
      : MotionError(format(kind, line, column, what)), kind_(kind), line_(line), column_(column) {}

  BvhErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(BvhErrorKind kind, std::size_t line, std::size_t column,
                            const std::string& what) {
    return "bvh:" + std::to_string(line) + ":" + std::to_string(column) + ": " +
           std::string(to_string(kind)) + ": " + what;
  }

  BvhErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

struct BvhOptions {
  double scale{0.01};  // file units to meters; CMU-style data is in centimeters
  std::string clip_id{"clip"};
  ClipKind kind{ClipKind::Gait};
  bool loopable{false};
};

namespace detail {

struct Token {
  std::string_view text;
  std::size_t line{0};
  std::size_t column{0};
};

class BvhLexer {
 public:
  explicit BvhLexer(std::string_view src) : src_(src) {}

  bool at_end() {
    skip_ws(true);
    return pos_ >= src_.size();
  }

  Token next() {
    skip_ws(true);
    Token t{{}, line_, col_};
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (c == '{' || c == '}') {
      t.text = src_.substr(pos_, 1);
      advance(1);
      return t;
    }
    const std::size_t start = pos_;
    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '{' && src_[pos_] != '}') advance(1);
    t.text = src_.substr(start, pos_ - start);
    return t;
  }

  Token peek() {
    const auto save = std::tuple{pos_, line_, col_};
    Token t = next();
    std::tie(pos_, line_, col_) = save;
    return t;
  }

  /// Remaining text of the current line, consumed including its newline.
  Token rest_of_line() {
    skip_ws(false);
    Token t{{}, line_, col_};
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
    t.text = src_.substr(start, pos_ - start);
    if (pos_ < src_.size()) advance(1);
    return t;
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return col_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

  void skip_ws(bool newlines) {
    while (pos_ < src_.size() && is_space(src_[pos_]) && (newlines || src_[pos_] != '\n')) advance(1);
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  std::string_view src_;
  std::size_t pos_{0};
  std::size_t line_{1};
  std::size_t col_{1};
};

inline double parse_number(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.text.empty()) {
    throw BvhError(BvhErrorKind::Syntax, t.line, t.column,
                   "expected a number, got '" + std::string(t.text) + "'");
  }
  return v;
}

class BvhParser {
 public:
  BvhParser(std::string_view text, const BvhOptions& opts) : lex_(text), opts_(opts) {}

  std::pair<Skeleton, MotionClip> parse() {
    expect("HIERARCHY");
    Token root = lex_.next();
    if (root.text != "ROOT") syntax(root, "expected ROOT");
    parse_joint(std::nullopt);
    Token extra = lex_.peek();
    if (extra.text == "ROOT") syntax(extra, "only one ROOT is supported");

    auto skeleton = std::make_shared<Skeleton>(opts_.clip_id, std::move(joints_));
    expect("MOTION");
    expect("Frames:");
    Token nt = lex_.next();
    const double nframes_d = parse_number(nt);
    if (nframes_d < 0 || nframes_d != static_cast<double>(static_cast<long long>(nframes_d))) {
      syntax(nt, "frame count must be a non-negative integer");
    }
    const auto nframes = static_cast<std::size_t>(nframes_d);
    Token ft1 = lex_.next();
    Token ft2 = lex_.next();
    if (ft1.text != "Frame" || ft2.text != "Time:") syntax(ft1, "expected 'Frame Time:'");
    Token ftt = lex_.next();
    const double frame_time = parse_number(ftt);
    if (!(frame_time > 0.0)) {
      throw BvhError(BvhErrorKind::NonPositiveFrameTime, ftt.line, ftt.column,
                     "frame time must be positive, got " + std::string(ftt.text));
    }
    lex_.rest_of_line();

    MotionClip clip;
    clip.id = opts_.clip_id;
    clip.kind = opts_.kind;
    clip.skeleton = skeleton;
    clip.frame_time = frame_time;
    clip.loopable = opts_.loopable;

    const std::size_t nch = skeleton->channel_count();
    std::vector<bool> is_pos(nch, false);
    for (std::size_t j = 0; j < skeleton->joint_count(); ++j) {
      for (std::size_t k = 0; k < skeleton->joint(j).channels.size(); ++k) {
        is_pos[skeleton->channel_start(j) + k] = !is_rotation(skeleton->joint(j).channels[k]);
      }
    }

    while (!lex_.at_end()) {
      Token row = lex_.rest_of_line();
      JointConfig cfg;
      cfg.channels.reserve(nch);
      BvhLexer fields(row.text);
      std::size_t col_base = row.column;
      while (!fields.at_end()) {
        Token f = fields.next();
        f.line = row.line;
        f.column = col_base + f.column - 1;
        double v = parse_number(f);
        if (cfg.channels.size() < nch && is_pos[cfg.channels.size()]) v *= opts_.scale;
        cfg.channels.push_back(v);
      }
      if (cfg.channels.empty()) continue;
      if (cfg.channels.size() != nch) {
        throw BvhError(BvhErrorKind::ChannelCountMismatch, row.line, row.column,
                       "frame " + std::to_string(clip.frames.size()) + " has " +
                           std::to_string(cfg.channels.size()) + " values, skeleton declares " +
                           std::to_string(nch) + " channels");
      }
      clip.frames.push_back(std::move(cfg));
    }
    if (clip.frames.size() != nframes) {
      throw BvhError(BvhErrorKind::FrameCountMismatch, nt.line, nt.column,
                     "declared " + std::to_string(nframes) + " frames, found " +
                         std::to_string(clip.frames.size()));
    }
    if (clip.frames.empty()) {
      throw BvhError(BvhErrorKind::FrameCountMismatch, nt.line, nt.column, "clip has no frames");
    }
    Skeleton sk = *skeleton;
    return {std::move(sk), std::move(clip)};
  }

 private:
  [[noreturn]] void syntax(const Token& t, const std::string& msg) {
    throw BvhError(BvhErrorKind::Syntax, t.line, t.column,
                   msg + (t.text.empty() ? " at end of input" : ", got '" + std::string(t.text) + "'"));
  }

  void expect(std::string_view word) {
    Token t = lex_.next();
    if (t.text != word) syntax(t, "expected '" + std::string(word) + "'");
  }

  Eigen::Vector3d parse_offset() {
    expect("OFFSET");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) v[i] = parse_number(lex_.next()) * opts_.scale;
    return v;
  }

  void parse_joint(std::optional<std::size_t> parent) {
    Token name = lex_.next();
    if (name.text.empty() || name.text == "{" || name.text == "}") syntax(name, "expected joint name");
    for (const auto& j : joints_) {
      if (j.name == name.text) syntax(name, "duplicate joint name");
    }
    Joint joint;
    joint.name = std::string(name.text);
    joint.parent = parent;
    expect("{");
    joint.offset = parse_offset();
    Token ch = lex_.next();
    if (ch.text != "CHANNELS") syntax(ch, "expected CHANNELS");
    Token nt = lex_.next();
    const double n = parse_number(nt);
    if (n != 3.0 && n != 6.0) {
      throw BvhError(BvhErrorKind::UnsupportedChannel, nt.line, nt.column,
                     "joints must declare 3 or 6 channels, got " + std::string(nt.text));
    }
    for (int i = 0; i < static_cast<int>(n); ++i) {
      Token c = lex_.next();
      const auto parsed = parse_channel(c.text);
      if (!parsed) {
        throw BvhError(BvhErrorKind::UnsupportedChannel, c.line, c.column,
                       "unsupported channel '" + std::string(c.text) + "'");
      }
      for (auto existing : joint.channels) {
        if (existing == *parsed) syntax(c, "repeated channel");
      }
      joint.channels.push_back(*parsed);
    }
    const std::size_t index = joints_.size();
    joints_.push_back(std::move(joint));

    while (true) {
      Token t = lex_.next();
      if (t.text == "}") return;
      if (t.text == "JOINT") {
        parse_joint(index);
      } else if (t.text == "End") {
        expect("Site");
        expect("{");
        if (joints_[index].end_site) syntax(t, "joint has two End Sites");
        joints_[index].end_site = parse_offset();
        expect("}");
      } else {
        syntax(t, "expected JOINT, End Site or '}'");
      }
    }
  }

  BvhLexer lex_;
  BvhOptions opts_;
  std::vector<Joint> joints_;
};

// 15 significant digits: stable under repeated unit scaling, exact to ~1e-15.
inline std::string format_double(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.15g", v == 0.0 ? 0.0 : v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace detail

/// Parses a BVH document (single ROOT, 3 or 6 channels per joint, one MOTION
/// block). Offsets and position channels are multiplied by `opts.scale`.
inline std::pair<Skeleton, MotionClip> parse_bvh(std::string_view text, const BvhOptions& opts = {}) {
  return detail::BvhParser(text, opts).parse();
}

inline std::pair<Skeleton, MotionClip> load_bvh(const std::string& path, BvhOptions opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MotionError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bvh(ss.str(), opts);
}

/// Writes a clip back to BVH text, dividing lengths by `scale`.
inline std::string write_bvh(const MotionClip& clip, double scale = 0.01) {
  const Skeleton& sk = *clip.skeleton;
  std::ostringstream out;
  auto num = [&](double v) { return detail::format_double(v); };
  auto vec = [&](const Eigen::Vector3d& v) {
    return num(v.x() / scale) + " " + num(v.y() / scale) + " " + num(v.z() / scale);
  };

  std::vector<std::vector<std::size_t>> children(sk.joint_count());
  for (std::size_t j = 1; j < sk.joint_count(); ++j) children[*sk.joint(j).parent].push_back(j);

  out << "HIERARCHY\n";
  std::vector<std::size_t> order;  // file order of joints (depth first)
  auto emit = [&](auto&& self, std::size_t j, int depth) -> void {
    const std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
    const auto& jt = sk.joint(j);
    order.push_back(j);
    out << ind << (jt.parent ? "JOINT " : "ROOT ") << jt.name << "\n" << ind << "{\n";
    out << ind << "  OFFSET " << vec(jt.offset) << "\n";
    out << ind << "  CHANNELS " << jt.channels.size();
    for (auto c : jt.channels) out << " " << channel_name(c);
    out << "\n";
    for (auto c : children[j]) self(self, c, depth + 1);
    if (jt.end_site) {
      out << ind << "  End Site\n" << ind << "  {\n";
      out << ind << "    OFFSET " << vec(*jt.end_site) << "\n" << ind << "  }\n";
    }
    out << ind << "}\n";
  };
  emit(emit, 0, 0);

  out << "MOTION\nFrames: " << clip.frames.size() << "\nFrame Time: " << num(clip.frame_time) << "\n";
  for (const auto& f : clip.frames) {
    bool first = true;
    for (auto j : order) {
      const auto& chans = sk.joint(j).channels;
      for (std::size_t k = 0; k < chans.size(); ++k) {
        const double v = f.channels[sk.channel_start(j) + k];
        if (!first) out << ' ';
        first = false;
        out << num(is_rotation(chans[k]) ? v : v / scale);
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fva::motion
