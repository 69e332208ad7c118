#pragma once

#include <stdexcept>
#include <string>

namespace inkrementa {

/// Base of every error raised by the library. `category()` drives the CLI exit code.
class Error : public std::runtime_error {
public:
  enum class Category { config, data, runtime };

  explicit Error(const std::string& what, Category category = Category::runtime)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

private:
  Category category_;
};

#define INKREMENTA_DEFINE_ERROR(Name, Cat)                                    \
  class Name : public Error {                                                 \
  public:                                                                     \
    explicit Name(const std::string& what) : Error(what, Category::Cat) {}    \
  };

INKREMENTA_DEFINE_ERROR(ShapeError, runtime)
INKREMENTA_DEFINE_ERROR(EmptyInputError, runtime)
INKREMENTA_DEFINE_ERROR(IndexError, runtime)
INKREMENTA_DEFINE_ERROR(ArgumentError, runtime)
INKREMENTA_DEFINE_ERROR(DegenerateHeadError, runtime)
INKREMENTA_DEFINE_ERROR(ConflictError, runtime)
INKREMENTA_DEFINE_ERROR(MappingError, runtime)
INKREMENTA_DEFINE_ERROR(ConfigError, config)
INKREMENTA_DEFINE_ERROR(VersionError, data)
INKREMENTA_DEFINE_ERROR(IoError, data)
INKREMENTA_DEFINE_ERROR(ParseError, data)
INKREMENTA_DEFINE_ERROR(PlanError, data)

#undef INKREMENTA_DEFINE_ERROR

}  // namespace inkrementa
