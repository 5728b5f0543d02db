#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace rtlpsc {

// Base of every error thrown by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t line, std::size_t column)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class UnsupportedConstruct : public Error {
public:
    UnsupportedConstruct(const std::string& what, std::size_t line, std::size_t column)
        : Error("unsupported construct at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class PathNotFound : public Error {
public:
    explicit PathNotFound(const std::string& path) : Error("path not found: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class WidthMismatch : public Error {
public:
    WidthMismatch(std::size_t a, std::size_t b)
        : Error("bit-vector width mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class InsufficientSamples : public Error {
public:
    explicit InsufficientSamples(std::size_t got)
        : Error("at least 2 samples required, got " + std::to_string(got)) {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ConstantVector : public Error {
public:
    ConstantVector() : Error("correlation undefined for a constant vector") {}
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& file) : Error("missing file: " + file), file_(file) {}
    MissingFile(const std::string& file, std::size_t plaintext, std::optional<std::size_t> cycle)
        : Error("missing SAIF file for plaintext " + std::to_string(plaintext) +
                (cycle ? ", cycle " + std::to_string(*cycle) : std::string()) + ": " + file),
          file_(file),
          plaintext_(plaintext),
          cycle_(cycle) {}

    const std::string& file() const noexcept { return file_; }
    std::optional<std::size_t> plaintext() const noexcept { return plaintext_; }
    std::optional<std::size_t> cycle() const noexcept { return cycle_; }

private:
    std::string file_;
    std::optional<std::size_t> plaintext_;
    std::optional<std::size_t> cycle_;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rtlpsc
