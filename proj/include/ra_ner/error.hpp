#pragma once

#include <stdexcept>
#include <string>

namespace ra_ner {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class parse_error : public error {
  public:
    parse_error(std::string const& what, std::size_t line)
        : error("line " + std::to_string(line) + ": " + what), m_line(line)
    {}
    explicit parse_error(std::string const& what) : error(what) {}

    std::size_t line() const noexcept { return m_line; }

  private:
    std::size_t m_line = 0;
};

class invalid_bio : public error {
  public:
    using error::error;
};

class format_error : public error {
  public:
    using error::error;
};

class tagger_error : public error {
  public:
    tagger_error(std::string const& what, std::string example_id)
        : error(example_id.empty() ? what : "example " + example_id + ": " + what),
          m_example_id(std::move(example_id))
    {}

    std::string const& example_id() const noexcept { return m_example_id; }

  private:
    std::string m_example_id;
};

}  // namespace ra_ner
