#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace choral {

class SourceFile {
 public:
  SourceFile(std::string name, std::string text);

  const std::string &name() const { return name_; }
  const std::string &text() const { return text_; }

  // 1-based line and column of a byte offset.
  std::pair<int, int> lineCol(uint32_t offset) const;
  std::string lineText(int line) const;
  int lineCount() const { return static_cast<int>(lineStarts_.size()); }

 private:
  std::string name_;
  std::string text_;
  std::vector<uint32_t> lineStarts_;
};

using SourceRef = std::shared_ptr<const SourceFile>;

// Reads a file; throws std::runtime_error when it cannot be opened.
SourceRef loadSource(const std::string &path);

// Half-open byte range into a source file.
struct Span {
  SourceRef file;
  uint32_t start = 0;
  uint32_t end = 0;

  bool valid() const { return file != nullptr; }
  int line() const;
  int column() const;
  Span to(const Span &other) const;
};

}  // namespace choral
