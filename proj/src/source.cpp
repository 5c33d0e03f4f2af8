#include "choral/source.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace choral {

SourceFile::SourceFile(std::string name, std::string text)
    : name_(std::move(name)), text_(std::move(text)) {
  lineStarts_.push_back(0);
  for (uint32_t i = 0; i < text_.size(); ++i)
    if (text_[i] == '\n') lineStarts_.push_back(i + 1);
}

std::pair<int, int> SourceFile::lineCol(uint32_t offset) const {
  auto it = std::upper_bound(lineStarts_.begin(), lineStarts_.end(), offset);
  int line = static_cast<int>(it - lineStarts_.begin());
  int col = static_cast<int>(offset - lineStarts_[line - 1]) + 1;
  return {line, col};
}

std::string SourceFile::lineText(int line) const {
  if (line < 1 || line > lineCount()) return "";
  uint32_t b = lineStarts_[line - 1];
  uint32_t e = line < lineCount() ? lineStarts_[line] : static_cast<uint32_t>(text_.size());
  std::string s = text_.substr(b, e - b);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

int Span::line() const { return file ? file->lineCol(start).first : 0; }
int Span::column() const { return file ? file->lineCol(start).second : 0; }

Span Span::to(const Span &other) const {
  if (!file) return other;
  if (!other.file) return *this;
  Span s = *this;
  s.start = std::min(start, other.start);
  s.end = std::max(end, other.end);
  return s;
}

SourceRef loadSource(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::make_shared<SourceFile>(path, ss.str());
}

}  // namespace choral
