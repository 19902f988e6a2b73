# a pipeline that logs whether each stage changed the data
to_si <- function(d) {
  d$height <- d$height * 2.54/100
  d
}
out <- women |> start_log(simple$new()) |> to_si |> identity |> dump_log()
