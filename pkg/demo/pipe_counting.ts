# a pipeline that counts its own stages
out <- 3 |> start_counting() |> sin |> cos |> end_counting()
out
